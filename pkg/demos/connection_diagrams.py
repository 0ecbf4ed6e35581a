"""Predicted travelling-wave connections between stable periodic patterns.

An edge w- -> w+ is drawn when both patterns exist and either they differ at a
single site (solid) or no stable pattern between them exists (dashed).
"""

from nagumo_lattice import connections as conn
from nagumo_lattice import equilibria as eq

for n, points in [(3, [(0.45, 0.01), (0.6, 0.04), (0.4, 0.04)]),
                  (4, [(0.45, 0.005), (0.6, 0.048)])]:
    for a, d in points:
        classes = conn.predict_connections(n, eq.ParameterPoint(a, d))
        print(f"n = {n}, (a, d) = ({a}, {d}):")
        for c in classes:
            style = "solid " if c.basis is conn.Basis.COND_A else "dashed"
            print(f"  {style} {str(c.w_minus):>4} -> {str(c.w_plus):<4}  {c.region}")

# a predicted edge can be checked by direct simulation
c = conn.ConnectionClass(conn.Word.parse("0"), conn.Word.parse("001"), conn.Basis.COND_A, "")
rep = conn.verify_connection(c, eq.ParameterPoint(0.404, 0.054))
print(f"\nsimulated [0 -> 001] at (0.404, 0.054): persists = {rep.persists}, c = {rep.speed:+.4f}")
