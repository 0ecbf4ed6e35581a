"""Command-line front end.

Every subcommand prints either CSV (header row first) or a JSON envelope
``{"config": ..., "results": ..., "provenance": ...}``.  Failures go to
standard error as JSON with exit code 2 (invalid input) or 3 (numerical).
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np
import scipy

from . import __version__
from . import asymptotics as asy
from . import bifurcation as bf
from . import connections as conn
from . import continuation as cont
from . import equilibria as eq
from . import waves
from .errors import NagumoError, UnsupportedWord
from .words import Word

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass
class RunConfig:
    newton_tol: float = eq.NEWTON_TOL
    marginal_tol: float = eq.MARGINAL_TOL
    pin_tol: float = waves.PIN_TOL
    multistart_factor: int = eq.MULTISTART_FACTOR
    step: float = 1e-3
    arc_step: float = bf.ARC_STEP
    dt: Optional[float] = None
    t_end: float = waves.DEFAULT_T_END
    J: int = waves.DEFAULT_J
    width: float = waves.DEFAULT_WIDTH
    stride: int = 10
    jobs: int = 1
    output: str = "json"
    out: Optional[str] = None

    @classmethod
    def from_sources(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls()
        if getattr(args, "config", None):
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
            known = {f.name for f in fields(cls)}
            for k, v in data.items():
                key = k.replace("-", "_")
                if key not in known:
                    raise ValueError(f"unknown config key {k!r}")
                setattr(cfg, key, v)
        for f in fields(cls):
            v = getattr(args, f.name, None)
            if v is not None:
                setattr(cfg, f.name, v)
        if getattr(args, "csv", False):
            cfg.output = "csv"
        if getattr(args, "json", False):
            cfg.output = "json"
        return cfg


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _point(args) -> eq.ParameterPoint:
    return eq.ParameterPoint(args.a, args.d)


def _word(text: str, n: Optional[int] = None) -> Word:
    w = Word.parse(text)
    if n is not None and len(w) != n:
        raise ValueError(f"word {w} has length {len(w)}, expected n = {n}")
    return w


def _to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): _to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_to_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, Word):
        return str(x)
    if hasattr(x, "value") and hasattr(x, "name"):
        return x.value
    return x


def _resolved_config(cmd: str, args, cfg: RunConfig) -> dict:
    config = asdict(cfg)
    config["command"] = cmd
    config["arguments"] = {k: v for k, v in sorted(vars(args).items())
                           if k not in ("func", "config") and not k.startswith("_")}
    return config


def _provenance() -> dict:
    return {"package": "nagumo_lattice", "version": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "python": platform.python_version()}


def _envelope(cmd: str, args, cfg: RunConfig, results) -> str:
    env = {"config": _resolved_config(cmd, args, cfg), "results": results,
           "provenance": _provenance()}
    return json.dumps(_to_jsonable(env), indent=2)


def _emit(text: str, cfg: RunConfig, config_json: Optional[str] = None) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
        if config_json is not None:
            # CSV has no room for the resolved config, so it goes next to the file
            with open(cfg.out + ".config.json", "w") as fh:
                fh.write(config_json + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_roots(args, cfg):
    roots = eq.enumerate_roots(args.n, args.a, args.d, multistart_factor=cfg.multistart_factor,
                               marginal_tol=cfg.marginal_tol)
    if cfg.output == "csv":
        n = args.n
        rows = [",".join([f"u_{i}" for i in range(1, n + 1)]
                         + [f"lambda_{i}" for i in range(1, n + 1)] + ["stability"])]
        for r in roots:
            rows.append(",".join([repr(float(x)) for x in r.u] + [repr(float(x)) for x in r.eigenvalues]
                                 + [r.stability.value]))
        return "\n".join(rows)
    return [r.to_record() for r in roots]


def _path_from(args) -> cont.ParamPath:
    if args.path:
        pts = [tuple(float(v) for v in leg.split(",")) for leg in args.path.split(";")]
        return cont.ParamPath(pts)
    return cont.ParamPath.vertical(args.a, args.d_end)


def cmd_branch(args, cfg):
    w = _word(args.word, args.n)
    br = cont.continue_branch(w, _path_from(args), step=cfg.step, raise_on_failure=True)
    if cfg.output == "csv":
        return br.to_csv()
    return {**br.metadata(), "samples": [
        {"a": s.a, "d": s.d, "u": s.u, "det": s.det, "min_eig": s.min_eig} for s in br.samples]}


def cmd_type_of(args, cfg):
    u = np.array(_floats(args.u))
    e = eq.newton_solve(u, args.a, args.d, tol=cfg.newton_tol)
    w = cont.type_of(e, step=cfg.step)
    return {"u": e.u, "word": None if w is None else str(w), "stability": e.stability}


def cmd_omega(args, cfg):
    w = _word(args.word, args.n)
    m = cont.omega_member(w, args.a, args.d, step=cfg.step)
    return {"word": str(w), "a": args.a, "d": args.d, "membership": m.value}


def cmd_gamma(args, cfg):
    w = _word(args.word, args.n)
    a_range = (args.a_min, args.a_max)
    if all(ch == "a" for ch in str(w)):
        curve = bf.homogeneous_gamma(len(w), arc_step=cfg.arc_step, a_range=a_range, d_max=args.d_max)
    else:
        seed_a = args.seed_a if args.seed_a is not None else 0.5 * (a_range[0] + a_range[1])
        curve = bf.trace_word_gamma(w, seed_a, arc_step=cfg.arc_step, a_range=a_range,
                                    d_max=args.d_max)
    if cfg.output == "csv":
        return curve.to_csv()
    return {"label": curve.label, "termination": curve.termination, "cusp_points": curve.cusp_points,
            "fold_of_folds": curve.fold_of_folds,
            "samples": [{"a": a, "d": d, "u": u} for a, d, u in curve.samples]}


def cmd_cusp(args, cfg):
    w = _word(args.word, args.n)
    seed_a = args.seed_a if args.seed_a is not None else 0.5 * (args.a_min + args.a_max)
    curve = bf.trace_word_gamma(w, seed_a, arc_step=cfg.arc_step, a_range=(args.a_min, args.a_max),
                                d_max=args.d_max, refine=False)
    pts = bf.cusp_fold_points(curve)
    if cfg.output == "csv":
        return "\n".join(["a,d,kind"] + [f"{a!r},{d!r},{k.value}" for a, d, k in pts])
    return [{"a": a, "d": d, "kind": k.value} for a, d, k in pts]


def cmd_regions(args, cfg):
    rm = bf.region_map(args.n, args.a_grid, args.d_grid, args.d_max,
                       multistart_factor=cfg.multistart_factor, jobs=cfg.jobs)
    if cfg.output == "csv":
        return rm.to_csv()
    return [{"a": float(a), "d": float(d), "n_stable": int(rm.stable[i, j]),
             "n_unstable": int(rm.unstable[i, j])}
            for i, d in enumerate(rm.d_values) for j, a in enumerate(rm.a_values)]


def cmd_speed(args, cfg):
    p = _point(args)
    traj, est = waves.run_front(args.left, args.right, p, J=cfg.J, t_end=cfg.t_end, dt=cfg.dt,
                                width=cfg.width, stride=cfg.stride)
    est = waves.measure_speed(traj, pin_tol=cfg.pin_tol)
    if args.snapshots:
        with open(args.snapshots, "w") as fh:
            fh.write(traj.to_csv())
    if cfg.output == "csv":
        return "\n".join(["time,position"] + [f"{t!r},{x!r}" for t, x in traj.interface_series])
    return {**est.to_record(), "aborted": traj.aborted,
            "interface": [[t, x] for t, x in traj.interface_series]}


def cmd_threshold(args, cfg):
    front = waves.FrontSpec(args.left, args.right, cfg.J / 2.0, cfg.width)
    th = waves.speed_threshold(front, args.a, args.d_lo, args.d_hi, tol=args.tol, J=cfg.J,
                               t_end=cfg.t_end)
    if cfg.output == "csv":
        return f"left,right,a,threshold\n{args.left},{args.right},{args.a!r},{th!r}"
    return {"left": args.left, "right": args.right, "a": args.a, "threshold": th}


def cmd_collide(args, cfg):
    rep = waves.collide(args.left, args.mid, args.right, _point(args), J=cfg.J, t_end=cfg.t_end,
                        dt=cfg.dt, width=cfg.width, stride=cfg.stride, buffer=args.buffer)
    if args.snapshots:
        with open(args.snapshots, "w") as fh:
            fh.write(rep.trajectory.to_csv())
    if cfg.output == "csv":
        rec = rep.to_record()
        return ",".join(rec) + "\n" + ",".join(str(v) for v in rec.values())
    return rep.to_record()


def cmd_connections(args, cfg):
    classes = conn.predict_connections(args.n, _point(args))
    if args.check:
        return [conn.verify_connection(c, _point(args), J=cfg.J, t_end=cfg.t_end).to_record()
                for c in classes]
    if cfg.output == "csv":
        return "\n".join(["from,to,basis,region"] + [
            f"{c.w_minus},{c.w_plus},{c.basis.value},\"{c.region}\"" for c in classes])
    return [c.to_edge() for c in classes]


def cmd_asympt(args, cfg):
    w = _word(args.word)
    if args.validate:
        rep = asy.validate_against_trace(w, _floats(args.validate))
        if cfg.output == "csv":
            return rep.to_csv()
        return {"word": str(w), "order": rep.order, "fitted_constant": rep.fitted_constant,
                "bound": rep.bound, "passed": rep.passed,
                "rows": [{"a": r.a, "d_traced": r.d_traced, "d_expansion": r.d_expansion,
                          "residual": r.residual} for r in rep.rows]}
    out = []
    for a in _floats(args.a):
        rec = {"a": a, "d": asy.threshold_expansion(w, a)}
        try:
            rec["u"] = asy.critical_pattern_expansion(w, a)
        except UnsupportedWord:
            rec["u"] = None
        out.append(rec)
    if cfg.output == "csv":
        return "\n".join(["a,d"] + [f"{r['a']!r},{r['d']!r}" for r in out])
    return out


def cmd_verify(args, cfg):
    from . import acceptance
    selected = set(int(x) for x in args.only.split(",")) if args.only else None
    results = acceptance.run_all(selected)
    for r in results:
        print(r.line(), file=sys.stderr)
    args._failed = not all(r.ok for r in results)
    if cfg.output == "csv":
        return "\n".join(["criterion,name,passed,seconds,limit"] + [
            f"{r.number},\"{r.name}\",{r.ok},{r.seconds:.3f},{r.limit}" for r in results])
    return [r.to_record() for r in results]


def _common(p: argparse.ArgumentParser):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true", help="JSON envelope output (default)")
    g.add_argument("--csv", action="store_true", help="CSV output with a header row")
    p.add_argument("--out", help="write output to this file instead of stdout")
    p.add_argument("--config", help="TOML file with RunConfig overrides")
    p.add_argument("--jobs", type=int, help="worker processes for sweeps")
    p.add_argument("--newton-tol", dest="newton_tol", type=float)
    p.add_argument("--marginal-tol", dest="marginal_tol", type=float)
    p.add_argument("--pin-tol", dest="pin_tol", type=float)
    p.add_argument("--step", type=float, help="continuation step along parameter paths")


def _integrator(p: argparse.ArgumentParser):
    p.add_argument("--J", type=int, help="number of lattice sites")
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--width", type=float, help="tanh width in sites")
    p.add_argument("--stride", type=int, help="snapshot stride in steps")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nagumo-lattice",
                                 description="Periodic equilibria, fold curves and fronts of the "
                                             "Nagumo lattice equation.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("roots", help="enumerate all real n-periodic equilibria")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--multistart-factor", dest="multistart_factor", type=int)
    _common(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("branch", help="continue a type-word branch along a path")
    p.add_argument("--word", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=float)
    p.add_argument("--d-end", dest="d_end", type=float, default=0.1)
    p.add_argument("--path", help="waypoints 'a,d;a,d;...' starting on d = 0")
    _common(p)
    p.set_defaults(func=cmd_branch)

    p = sub.add_parser("type-of", help="name a root by continuing it back to d = 0")
    p.add_argument("--u", required=True, help="comma-separated initial guess")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    _common(p)
    p.set_defaults(func=cmd_type_of)

    p = sub.add_parser("omega", help="membership of (a, d) in the existence region of a word")
    p.add_argument("--word", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    _common(p)
    p.set_defaults(func=cmd_omega)

    for name, fn, hlp in (("gamma", cmd_gamma, "trace the fold curve of a word"),
                          ("cusp", cmd_cusp, "cusp and fold points on a traced fold curve")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--word", required=True)
        p.add_argument("--n", type=int)
        p.add_argument("--a-min", dest="a_min", type=float, default=0.01)
        p.add_argument("--a-max", dest="a_max", type=float, default=0.99)
        p.add_argument("--d-max", dest="d_max", type=float, default=0.3)
        p.add_argument("--seed-a", dest="seed_a", type=float,
                       help="a at which the vertical branch fold seeds the trace")
        p.add_argument("--arc-step", dest="arc_step", type=float)
        _common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("regions", help="stable/unstable root counts on an (a, d) raster")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a-grid", dest="a_grid", type=int, default=20)
    p.add_argument("--d-grid", dest="d_grid", type=int, default=20)
    p.add_argument("--d-max", dest="d_max", type=float, default=0.1)
    p.add_argument("--multistart-factor", dest="multistart_factor", type=int)
    _common(p)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("speed", help="speed of a single front between two patterns")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--snapshots", help="write trajectory snapshots to this CSV file")
    _common(p)
    _integrator(p)
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("threshold", help="bisect the pinning threshold in d")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d-lo", dest="d_lo", type=float, required=True)
    p.add_argument("--d-hi", dest="d_hi", type=float, required=True)
    p.add_argument("--tol", type=float, default=waves.THRESHOLD_TOL)
    _common(p)
    _integrator(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("collide", help="collision of two fronts across a buffer pattern")
    p.add_argument("--left", required=True)
    p.add_argument("--mid", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--buffer", type=float, help="initial buffer width in sites (default J/8)")
    p.add_argument("--snapshots", help="write trajectory snapshots to this CSV file")
    _common(p)
    _integrator(p)
    p.set_defaults(func=cmd_collide)

    p = sub.add_parser("connections", help="predicted wave connections at (a, d)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--check", action="store_true", help="also integrate each predicted front")
    _common(p)
    _integrator(p)
    p.set_defaults(func=cmd_connections)

    p = sub.add_parser("asympt", help="small-a expansions of thresholds and critical patterns")
    p.add_argument("--word", required=True)
    p.add_argument("--a", default="0.1", help="comma-separated values of a")
    p.add_argument("--validate", help="comma-separated a samples to compare with traced folds")
    _common(p)
    p.set_defaults(func=cmd_asympt)

    p = sub.add_parser("verify", help="run the acceptance checks")
    p.add_argument("--only", help="comma-separated criterion numbers")
    _common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig.from_sources(args)
        results = args.func(args, cfg)
    except NagumoError as exc:
        print(json.dumps(_to_jsonable(exc.to_dict())), file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": "INVALID_INPUT", "message": str(exc)}), file=sys.stderr)
        return 2
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(json.dumps({"error": "NUMERICAL_FAILURE", "message": str(exc)}), file=sys.stderr)
        return 3
    try:
        _write(args, cfg, results)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not an error of ours
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
    # a failed acceptance check is a validation failure
    return 2 if getattr(args, "_failed", False) else 0


def _write(args, cfg: RunConfig, results) -> None:
    if isinstance(results, str):
        side = json.dumps(_to_jsonable({"config": _resolved_config(args.command, args, cfg),
                                        "provenance": _provenance()}), indent=2)
        _emit(results, cfg, side)
    else:
        _emit(_envelope(args.command, args, cfg, results), cfg)


if __name__ == "__main__":
    sys.exit(main())
