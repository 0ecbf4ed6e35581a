"""Exception hierarchy.

Every error carries a machine-readable ``code`` and the process exit code the
command-line front end should use (2 for validation failures, 3 for numerical
failures).
"""


class NagumoError(Exception):
    code = "ERROR"
    exit_code = 3

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self), **self.details}


class NoConvergence(NagumoError):
    code = "NO_CONVERGENCE"


class SingularJacobian(NagumoError):
    code = "SINGULAR_JACOBIAN"


class DegenerateTangent(NagumoError):
    code = "DEGENERATE_TANGENT"


class BlowUp(NagumoError):
    code = "BLOW_UP"


class NoInterface(NagumoError):
    code = "NO_INTERFACE"


class UnsupportedWord(NagumoError):
    code = "UNSUPPORTED_WORD"
    exit_code = 2


class MissingEquilibrium(NagumoError):
    code = "MISSING_EQUILIBRIUM"
    exit_code = 2


class SamePhase(NagumoError):
    code = "SAME_PHASE"
    exit_code = 2


class Indeterminate(NagumoError):
    code = "INDETERMINATE"
    exit_code = 2
