"""
Why the averaged sequence matters.

For f(x, y) = <Ax, y - x> with A a quarter turn, every step of the plain
iteration moves perpendicular to x, so |x| can only grow.  The weighted
average of the iterates still drifts toward the unique solution 0.
"""

import numpy as np

from splitep.problems import build_rotation
from splitep.schedules import HarmonicScale
from splitep.solver import SolverConfig, run

inst = build_rotation()
cfg = SolverConfig(mode="ergodic", schedule=HarmonicScale(1), max_iter=10_001, stop_eps=1e-300)
res = run(inst.bifunction, inst.feasible_set, [1.0, 0.0], cfg)

print("    k      |x^k|      |z^k|")
for k in (0, 10, 100, 1000, 10_000):
    r = res.trace[k]
    print(f"{k:5d}  {np.linalg.norm(r.x):9.4f}  {np.linalg.norm(r.z):9.4f}")

# |x^{k+1}|^2 = (1 + lam_k^2) |x^k|^2 exactly: the plain iterates spiral outwards
r = res.trace[-1]
print("growth identity residual:", np.sum(r.x_next ** 2) - (1 + r.lam ** 2) * np.sum(r.x ** 2))
