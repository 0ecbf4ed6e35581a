"""Trace the fold curve of the 001 pattern and locate its slanted cusp.

Near a = 0.4014 the curve doubles back on itself, so above the fold of folds
a vertical line crosses it three times and the stable 001 root disappears and
then reappears as d increases.
"""

from nagumo_lattice import bifurcation as bf
from nagumo_lattice import continuation as cont
from nagumo_lattice import equilibria as eq

curve = bf.trace_word_gamma("001", 0.41)
print(f"{curve.label}: {len(curve.samples)} samples, termination {curve.termination}")
for a, d, kind in bf.cusp_fold_points(curve):
    print(f"  {kind.value:5s} at a = {a:.7f}, d = {d:.7f}")

a = 0.40146
print(f"\ncrossings of the curve with the vertical line a = {a}:")
for d in curve.d_at(a):
    print(f"  d = {d:.6f}")

d = 0.0565
print(f"\nat (a, d) = ({a}, {d}) the vertical path is blocked:")
br = cont.continue_branch("001", cont.ParamPath.vertical(a, d), raise_on_failure=False)
print(f"  vertical continuation: {br.termination.value} at d = {br.fold_point[2]:.6f}")
print(f"  membership via detours: {cont.omega_member('001', a, d).value}")
stable = [r for r in eq.enumerate_roots(3, a, d)
          if r.stability is eq.Stability.STABLE and not r.is_homogeneous()]
print("  stable non-homogeneous roots named by type_of:",
      sorted(str(cont.type_of(r)) for r in stable))

# write the curve for plotting
with open("gamma_001.csv", "w") as fh:
    fh.write(curve.to_csv())
print("\nwrote gamma_001.csv")
