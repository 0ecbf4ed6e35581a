"""Fronts between periodic patterns, their pinning threshold, and collisions.

A front from 0 to the 001 pattern is pinned at small d and starts to travel
once d passes a threshold.  Two fronts sandwiching a buffer of an
intermediate pattern eat the buffer and leave a single monochromatic front.
"""

from nagumo_lattice import equilibria as eq
from nagumo_lattice import waves

P = eq.ParameterPoint

for d in (0.05, 0.054):
    _, est = waves.run_front("0", "001", P(0.404, d))
    state = "pinned" if est.pinned else f"c = {est.c:+.4f}"
    print(f"[0 -> 001] at (0.404, {d}): {state}")

th = waves.speed_threshold(waves.FrontSpec("0", "001", 200.0), 0.404, 0.050, 0.054)
print(f"pinning threshold of [0 -> 001] at a = 0.404: d = {th:.5f}")

print()
for left, mid, right, a, d in [("0", "001", "1", 0.404, 0.054),
                               ("0", "001", "1", 0.404, 0.05),
                               ("0", "0001", "1", 0.378, 0.058),
                               ("0", "0001", "1", 0.37, 0.0625)]:
    rep = waves.collide(left, mid, right, P(a, d))
    speed = "" if rep.final_speed is None else f", final c = {rep.final_speed:+.4f}"
    print(f"({left}, {mid}, {right}) at ({a}, {d}): {rep.outcome.value}"
          f", buffer gone at t = {rep.buffer_extinction_time}{speed}")
    print(f"    left interface moved {rep.left_displacement:+.1f} sites,"
          f" right interface {rep.right_displacement:+.1f}")
