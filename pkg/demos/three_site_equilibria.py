"""Walk through the equilibria of the 3-periodic Nagumo lattice.

At small coupling every word over {0, a, 1} has its own equilibrium; as d
grows the branches annihilate in folds until only the homogeneous states are
left.  Run with ``python3 demos/three_site_equilibria.py``.
"""

import numpy as np

from nagumo_lattice import asymptotics as asy
from nagumo_lattice import continuation as cont
from nagumo_lattice import equilibria as eq

a = 0.5
for d in (0.01, 0.05, 0.2):
    roots = eq.enumerate_roots(3, a, d)
    stable = sum(r.stability is eq.Stability.STABLE for r in roots)
    print(f"a = {a}, d = {d:<5}: {len(roots):2d} roots, {stable} stable")

# name a few roots by following them back to d = 0
print("\nroots at (0.3, 0.01) and their type words")
for r in eq.enumerate_roots(3, 0.3, 0.01)[:8]:
    w = cont.type_of(r)
    print(f"  u = {np.array2string(r.u, precision=4)}  {r.stability.value:9s} type {w}")

# the stable 011 branch meets the unstable a11 branch in a fold
print("\nfold of the 011 branch on vertical lines, against d = a^2/8 + a^4/64")
for a in (0.05, 0.1, 0.2, 0.3):
    br = cont.continue_branch("011", cont.ParamPath.vertical(a, 0.2))
    d_star = br.fold_point[2]
    print(f"  a = {a:4}: traced {d_star:.6e}, expansion {asy.threshold_expansion('011', a):.6e}")

# the homogeneous middle state survives its own loss of hyperbolicity
br = cont.continue_branch("aaa", cont.ParamPath.vertical(0.4, 0.15))
print(f"\naaa branch: {br.termination.value}, degenerate crossing at d = {br.crossings[0][2]:.6f}"
      f" (a(1-a)/3 = {0.4 * 0.6 / 3:.6f})")
