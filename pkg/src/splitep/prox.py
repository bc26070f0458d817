"""
Exact and iterative solvers for the strongly convex subproblems

    argmin_y  lam * f_i(x, y) + 1/2 |y - anchor|^2   s.t.  y in S.

All solvers are pure functions.  Box-with-sum sets are handled by a scalar
multiplier on the coupling constraint (:func:`separable_qp_sum_box`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Affine,
    Box,
    BoxSum,
    ContractError,
    DiagonalQuadratic,
    FeasibleSet,
    GeneralQuadratic,
    GenericSmooth,
    InfeasibleError,
    SeparableLogBarrier,
    WholeSpace,
    Zero,
)

NU_TOL = 1e-12
SUM_TOL = 1e-10
MAX_BISECT = 200


class ConvergenceError(RuntimeError):
    """An iterative subsolver hit its iteration cap."""

    def __init__(self, msg, residual=float("nan")):
        super().__init__(msg)
        self.residual = residual


@dataclass(frozen=True)
class ProxInfo:
    """Diagnostics of one subproblem solve."""

    iterations: int = 0
    residual: float = 0.0


def project_box(p, lo, hi) -> np.ndarray:
    return np.clip(np.asarray(p, dtype=float), lo, hi)


def _sum_slab_feasible(lo, hi, sum_lo, sum_hi):
    return sum_lo <= sum_hi and lo.sum() <= sum_hi and hi.sum() >= sum_lo


def separable_qp_sum_box(d, t, lo, hi, sum_lo=-np.inf, sum_hi=np.inf, tol=SUM_TOL,
                         full_output=False):
    """Minimize ``sum_i 1/2 d_i (y_i - t_i)^2`` over a box with a sum interval.

    The solution is ``y_i(nu) = clip(t_i - nu / d_i, lo_i, hi_i)`` where the
    multiplier ``nu`` of the coupling constraint is zero when the clipped
    point already has a feasible sum, and otherwise is found by bisection on
    the nonincreasing map ``nu -> sum_i y_i(nu)`` followed by an exact
    solve on the free coordinates.

    Parameters
    ----------
    d : array_like
        Positive weights.
    t : array_like
        Targets.
    lo, hi : array_like
        Box bounds (may be infinite).
    sum_lo, sum_hi : float
        Bounds on ``sum(y)``.
    tol : float
        Accepted absolute error on the active sum constraint.
    full_output : bool
        If True also return ``(nu, bisection_iterations)``.

    Returns
    -------
    y : ndarray
    nu, iterations : float, int
        Only when `full_output` is True.
    """
    d = np.asarray(d, dtype=float)
    t = np.asarray(t, dtype=float)
    lo = np.broadcast_to(np.asarray(lo, dtype=float), t.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), t.shape)
    if d.shape != t.shape:
        raise ContractError("d and t must have equal shapes")
    if not np.all(d > 0) or not np.all(np.isfinite(d)):
        raise ContractError("weights d must be finite and positive")
    if np.any(lo > hi) or not _sum_slab_feasible(lo, hi, sum_lo, sum_hi):
        raise InfeasibleError("box/sum region is empty")

    def y_of(nu):
        return np.clip(t - nu / d, lo, hi)

    y = y_of(0.0)
    s = y.sum()
    if sum_lo <= s <= sum_hi:
        return (y, 0.0, 0) if full_output else y

    target = sum_hi if s > sum_hi else sum_lo
    if s > sum_hi:
        a, b = 0.0, float(np.max(d * (t - lo)))
    else:
        a, b = float(np.min(d * (t - hi))), 0.0

    # unbounded side: grow until the bracket holds the root
    step = 1.0
    while not math.isfinite(a):
        a = -step
        if y_of(a).sum() >= target:
            break
        a = -np.inf
        step *= 2.0
    step = 1.0
    while not math.isfinite(b):
        b = step
        if y_of(b).sum() <= target:
            break
        b = np.inf
        step *= 2.0

    it = 0
    nu = 0.5 * (a + b)
    while it < MAX_BISECT:
        it += 1
        nu = 0.5 * (a + b)
        r = y_of(nu).sum() - target
        if abs(r) <= tol or b - a <= NU_TOL * max(1.0, abs(nu)):
            break
        if r > 0:
            a = nu
        else:
            b = nu
    else:
        raise RuntimeError("multiplier bisection failed to converge; this indicates a bug")

    # exact solve on the free coordinates at the located active set
    z = t - nu / d
    free = (z > lo) & (z < hi)
    if np.any(free):
        fixed_sum = np.clip(z[~free], lo[~free], hi[~free]).sum()
        nu_exact = (t[free].sum() + fixed_sum - target) / (1.0 / d[free]).sum()
        y_exact = y_of(nu_exact)
        if abs(y_exact.sum() - target) <= abs(y_of(nu).sum() - target):
            nu = nu_exact
    y = y_of(nu)
    if abs(y.sum() - target) > max(tol, 1e-12 * max(1.0, abs(target))):
        raise RuntimeError(f"sum residual {abs(y.sum() - target):.3e} above tolerance; this indicates a bug")
    return (y, nu, it) if full_output else y


def project(S: FeasibleSet, p, full_output=False):
    """Euclidean projection of ``p`` onto ``S``."""
    p = np.asarray(p, dtype=float)
    if isinstance(S, WholeSpace):
        out = (p.copy(), 0)
    elif isinstance(S, BoxSum):
        y, _, it = separable_qp_sum_box(np.ones_like(p), p, S.lo, S.hi, S.sum_lo, S.sum_hi,
                                        full_output=True)
        out = (y, it)
    elif isinstance(S, Box):
        out = (project_box(p, S.lo, S.hi), 0)
    else:
        raise ContractError(f"unsupported feasible set {type(S).__name__}")
    return out if full_output else out[0]


def prox_affine(c, lam, anchor, S: FeasibleSet, full_output=False):
    """``argmin lam * c.y + 1/2 |y - anchor|^2`` over ``S``, i.e. ``P_S(anchor - lam c)``."""
    if lam < 0:
        raise ContractError("lam must be >= 0")
    return project(S, np.asarray(anchor, float) - lam * np.asarray(c, float), full_output)


def prox_diag_quad(delta, lam, anchor, S: FeasibleSet, full_output=False):
    """``argmin lam * sum_j delta_j y_j^2 + 1/2 |y - anchor|^2`` over ``S``."""
    delta = np.asarray(delta, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    if lam < 0:
        raise ContractError("lam must be >= 0")
    if np.any(delta < 0):
        raise ContractError("delta must be nonnegative")
    d = 1.0 + 2.0 * lam * delta
    t = anchor / d
    if isinstance(S, WholeSpace):
        out = (t, 0)
    elif isinstance(S, BoxSum):
        y, _, it = separable_qp_sum_box(d, t, S.lo, S.hi, S.sum_lo, S.sum_hi, full_output=True)
        out = (y, it)
    else:
        out = (project_box(t, S.lo, S.hi), 0)
    return out if full_output else out[0]


def _log_phi(lam, z, y):
    return -lam * math.log1p(max(0.0, y)) + 0.5 * (y - z) ** 2


def prox_log1d(lam: float, z: float, lo: float, hi: float) -> float:
    """Minimize ``-lam * ln(1 + max(0, y)) + 1/2 (y - z)^2`` over ``[lo, hi]``.

    The objective is convex, so the minimizer is among: the clamp of ``z``
    onto the nonpositive part of the interval, the positive stationary point
    (root of ``y^2 + (1 - z) y - (z + lam) = 0``) and the finite endpoints.
    Ties go to the smaller ``y``.
    """
    if lam < 0:
        raise ContractError("lam must be >= 0")
    if lo > hi:
        raise InfeasibleError("lo > hi")
    cands = []
    if lo <= 0.0:
        cands.append(min(max(z, lo), min(hi, 0.0)))
    disc = (1.0 - z) ** 2 + 4.0 * (z + lam)
    if disc >= 0.0:
        yp = 0.5 * (-(1.0 - z) + math.sqrt(disc))
        if max(0.0, lo) <= yp <= hi:
            cands.append(yp)
    for e in (lo, hi):
        if math.isfinite(e):
            cands.append(e)
    best = min(cands, key=lambda y: (_log_phi(lam, z, y), y))
    return float(best)


def prox_log(scale, lam, anchor, S: FeasibleSet) -> np.ndarray:
    """Coordinatewise :func:`prox_log1d` with weight ``lam * scale`` over a box."""
    if isinstance(S, BoxSum):
        raise ContractError("log-barrier prox supports box or whole-space sets only")
    lo, hi = S.lo, S.hi
    return np.array([prox_log1d(lam * scale, z, l, h) for z, l, h in zip(anchor, lo, hi)])


def prox_generic(grad, lipschitz, lam, anchor, S: FeasibleSet, tol=1e-10, max_iter=100_000,
                 full_output=False):
    """Projected gradient on ``lam * g(y) + 1/2 |y - anchor|^2`` with step ``1 / (1 + lam L)``.

    ``grad`` is the gradient of the convex ``L``-smooth function ``g``.
    Stops when the fixed-point residual ``|y - P_S(y - grad_obj(y))|`` is at
    most `tol`; raises :class:`ConvergenceError` after `max_iter` steps.
    """
    if lam < 0:
        raise ContractError("lam must be >= 0")
    if not (lipschitz >= 0 and math.isfinite(lipschitz)):
        raise ContractError("smoothness bound must be finite and >= 0")
    anchor = np.asarray(anchor, dtype=float)
    step = 1.0 / (1.0 + lam * lipschitz)
    y = project(S, anchor)
    res = np.inf
    for it in range(max_iter + 1):
        g = lam * np.asarray(grad(y), float) + (y - anchor)
        res = float(np.linalg.norm(y - project(S, y - g)))
        if res <= tol:
            return (y, ProxInfo(it, res)) if full_output else y
        if it == max_iter:
            break
        y = project(S, y - step * g)
    raise ConvergenceError(f"projected gradient stopped after {max_iter} steps, residual {res:.3e}", res)


def prox(spec, lam, anchor, S: FeasibleSet, tol=1e-10, max_iter=100_000):
    """Dispatch a prox request to the solver matching `spec`.

    Returns ``(y, ProxInfo)``.
    """
    anchor = np.asarray(anchor, dtype=float)
    if isinstance(spec, Zero):
        y, it = project(S, anchor, full_output=True)
        return y, ProxInfo(it)
    if isinstance(spec, Affine):
        y, it = prox_affine(spec.c, lam, anchor, S, full_output=True)
        return y, ProxInfo(it)
    if isinstance(spec, DiagonalQuadratic):
        a = anchor if spec.c is None else anchor - lam * np.asarray(spec.c, float)
        y, it = prox_diag_quad(spec.delta, lam, a, S, full_output=True)
        return y, ProxInfo(it)
    if isinstance(spec, SeparableLogBarrier):
        return prox_log(spec.scale, lam, anchor, S), ProxInfo()
    if isinstance(spec, GeneralQuadratic):
        return prox_generic(spec.grad, spec.lipschitz, lam, anchor, S, tol, max_iter, full_output=True)
    if isinstance(spec, GenericSmooth):
        return prox_generic(spec.grad, spec.lipschitz, lam, anchor, S, tol, max_iter, full_output=True)
    raise ContractError(f"unknown prox spec {type(spec).__name__}")
