"""
A convex program posed as an equilibrium problem.

Minimizing phi(x) = 1/2 x'Qx - sum ln(1 + x_i) over a box is the same as
finding x with phi(y) - phi(x) >= 0 for every feasible y.  The quadratic and
the logarithm go to separate subproblems.  The primal residual
min_y f(x, y) is exactly the optimality gap phi(x*) - phi(x), so it doubles
as a certificate.
"""

import numpy as np

from splitep.problems import OpParams, build_op, op_objective
from splitep.schedules import HarmonicScale
from splitep.solver import SolverConfig, run
from splitep.verify import primal_residual

rng = np.random.default_rng(7)
M = rng.normal(size=(5, 5))
Q = M @ M.T / 5
inst = build_op(OpParams(Q=Q, box_lo=0.0, box_hi=2.0))
phi = op_objective(Q)

for c in (1, 10):
    cfg = SolverConfig(mode="plain", schedule=HarmonicScale(c), max_iter=10_000, stop_eps=1e-9)
    res = run(inst.bifunction, inst.feasible_set, inst.x0, cfg)
    rho = primal_residual(inst.bifunction, inst.feasible_set, res.x)
    print(f"beta={c}/(k+1): phi={phi(res.x):.8f}  residual={rho:.2e}  iterations={res.iterations}")

print("solution:", np.round(res.x, 5))
