"""
Certificates and oracles for computed equilibria.

The primal residual ``rho(xbar) = min_{y in S} f(xbar, y)`` is never positive
(``y = xbar`` gives 0), and ``xbar`` solves the equilibrium problem iff
``rho = 0``.  Only this side is computed: for monotone ``f`` with convex
``f(x, .)`` the primal and dual solution sets coincide, and the dual residual
would need a nonconcave maximization.
"""

from __future__ import annotations

import itertools
import math

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
    SeparableLogBarrier,
    SplitBifunction,
    WholeSpace,
    Zero,
    contains_point,
    eval_sum,
)
from .prox import project, prox, separable_qp_sum_box

CONTINUATION = (1e-2, 1e-4, 0.0)
LP_REGULARIZATION = 1e-12


def _separable_parts(spec, n):
    """``(delta, c)`` with ``spec(y) = sum delta_j y_j^2 + c.y``, or None if not separable-quadratic."""
    if isinstance(spec, Zero):
        return np.zeros(n), np.zeros(n)
    if isinstance(spec, Affine):
        return np.zeros(n), np.asarray(spec.c, float)
    if isinstance(spec, DiagonalQuadratic):
        c = np.zeros(n) if spec.c is None else np.asarray(spec.c, float)
        return np.asarray(spec.delta, float), c
    return None


def _smooth_grad(spec, n):
    """``(grad, L)`` of a smooth spec, or None for nonsmooth ones."""
    parts = _separable_parts(spec, n)
    if parts is not None:
        delta, c = parts
        return (lambda y: 2.0 * delta * y + c), 2.0 * float(np.max(delta, initial=0.0))
    if isinstance(spec, GeneralQuadratic):
        return spec.grad, spec.lipschitz
    if isinstance(spec, GenericSmooth):
        return spec.grad, float(spec.lipschitz)
    return None


def _min_separable(delta, c, eps, xbar, S):
    """Exact minimizer of ``sum (delta_j + eps) y_j^2 + (c - 2 eps xbar).y`` over ``S``.

    Returns None when the objective is unbounded below on ``S``.
    """
    w = delta + eps
    lin = c - 2.0 * eps * xbar
    lin_only = w <= 0
    if np.any(lin_only):
        if isinstance(S, BoxSum):
            w = np.where(lin_only, LP_REGULARIZATION, w)
            lin = np.where(lin_only, lin - 2.0 * LP_REGULARIZATION * xbar, lin)
            lin_only = np.zeros_like(lin_only)
        else:
            lo, hi = S.lo, S.hi
            lin_c = lin[lin_only]
            pick = np.where(lin_c > 0, lo[lin_only], np.where(lin_c < 0, hi[lin_only], xbar[lin_only]))
            if not np.all(np.isfinite(pick)):
                return None
    d = 2.0 * np.where(lin_only, 1.0, w)
    t = -lin / d
    if isinstance(S, WholeSpace):
        y = t
    elif isinstance(S, BoxSum):
        y = separable_qp_sum_box(d, t, S.lo, S.hi, S.sum_lo, S.sum_hi)
    else:
        y = np.clip(t, S.lo, S.hi)
    if np.any(lin_only):
        y = np.array(y)
        y[lin_only] = pick
    return y


def _fista(grad, L, mu, prox_step, y0, tol, max_iter):
    """Accelerated proximal gradient on ``smooth + nonsmooth``; ``prox_step(v, t)`` handles the latter."""
    t = 1.0 / L
    if mu > 0:
        q = math.sqrt(mu / L)
        mom = (1.0 - q) / (1.0 + q)
    y = np.array(y0, dtype=float)
    v = y.copy()
    theta = 1.0
    for _ in range(max_iter):
        y_new = prox_step(v - t * grad(v), t)
        if np.linalg.norm(y_new - prox_step(y_new - t * grad(y_new), t)) <= tol:
            return y_new
        if mu > 0:
            beta = mom
        else:
            theta_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
            beta = (theta - 1.0) / theta_new
            theta = theta_new
        v = y_new + beta * (y_new - y)
        y = y_new
    return y


def _minimize_regularized(spec1, spec2, eps, xbar, S, tol, max_iter):
    """Minimizer of ``f(xbar, .) + eps |. - xbar|^2`` over ``S`` (None if unbounded)."""
    n = xbar.size
    p1, p2 = _separable_parts(spec1, n), _separable_parts(spec2, n)
    if p1 is not None and p2 is not None:
        return _min_separable(p1[0] + p2[0], p1[1] + p2[1], eps, xbar, S)

    s1, s2 = _smooth_grad(spec1, n), _smooth_grad(spec2, n)
    if s1 is not None and s2 is not None:
        g1, L1 = s1
        g2, L2 = s2
        grad_f = lambda y: g1(y) + g2(y)
        L_f = L1 + L2
        nonsmooth = Zero()
    elif s1 is not None or s2 is not None:
        grad_f, L_f = s1 if s1 is not None else s2
        nonsmooth = spec2 if s1 is not None else spec1
    else:
        raise ContractError("cannot minimize a sum of two nonsmooth components")

    def grad(y):
        return np.asarray(grad_f(y), float) + 2.0 * eps * (y - xbar)

    def prox_step(v, t):
        return prox(nonsmooth, t, v, S)[0]

    L = max(L_f + 2.0 * eps, 1e-12)
    return _fista(grad, L, 2.0 * eps, prox_step, project(S, xbar), tol, max_iter)


def primal_residual(F: SplitBifunction, S: FeasibleSet, xbar, tol=1e-10, max_iter=20_000) -> float:
    """Approximate ``min_{y in S} f(xbar, y)``; ``xbar`` is an eps-solution iff the result is >= -eps.

    ``f(xbar, .)`` may be merely convex, so it is minimized with a proximal
    term ``eps |y - xbar|^2`` for ``eps`` in 1e-2, 1e-4 and finally 0 (exact
    when the structure is separable); the least value seen is reported.
    Returns ``-inf`` when ``f(xbar, .)`` is unbounded below on ``S``.
    """
    xbar = np.asarray(xbar, dtype=float)
    if not contains_point(S, xbar, 1e-8):
        raise ContractError("primal residual needs a feasible point")
    spec1, spec2 = F.prox_spec1(xbar), F.prox_spec2(xbar)
    best = 0.0
    for eps in CONTINUATION:
        y = _minimize_regularized(spec1, spec2, eps, xbar, S, tol, max_iter)
        if y is None:
            return -math.inf
        best = min(best, eval_sum(F, xbar, y))
    return best


def _grid_points(S: FeasibleSet, step: float) -> np.ndarray:
    if isinstance(S, WholeSpace) or not (np.all(np.isfinite(S.lo)) and np.all(np.isfinite(S.hi))):
        raise ContractError("grid oracle needs a bounded box")
    if S.dim > 3:
        raise ContractError("grid oracle supports dimension <= 3 only")
    axes = [np.arange(l, h + 0.5 * step, step) for l, h in zip(S.lo, S.hi)]
    axes = [np.clip(a, l, h) for a, l, h in zip(axes, S.lo, S.hi)]
    pts = np.array(list(itertools.product(*axes)))
    if isinstance(S, BoxSum):
        s = pts.sum(axis=1)
        pts = pts[(s >= S.sum_lo - 1e-12) & (s <= S.sum_hi + 1e-12)]
    return pts


def brute_force_equilibrium(F: SplitBifunction, S: FeasibleSet, grid_step: float) -> np.ndarray:
    """Grid point maximizing ``min_{y in grid} f(x, y)``; a test oracle for ``n <= 3``."""
    if not isinstance(S, Box):
        raise ContractError("grid oracle needs a Box or BoxSum set")
    pts = _grid_points(S, grid_step)
    best, best_val = None, -math.inf
    for x in pts:
        v = float(np.min(F.eval_batch(x, pts)))
        if v > best_val:
            best, best_val = x, v
    return np.array(best)


def fejer_monitor(trace, xstar) -> float:
    """Worst ``|x^{k+1} - x*|^2 - |x^k - x*|^2 - 2 beta_k^2`` over a trace (<= 0 expected)."""
    xstar = np.asarray(xstar, float)
    worst = -math.inf
    for r in trace:
        v = np.sum((r.x_next - xstar) ** 2) - np.sum((r.x - xstar) ** 2) - 2.0 * r.beta ** 2
        worst = max(worst, float(v))
    return worst


def strong_decay_monitor(trace, xstar, modulus: float) -> float:
    """Worst ``|x^{k+1} - x*|^2 - (1 - 2 m lam_k)|x^k - x*|^2 - 2 beta_k^2`` over a trace."""
    xstar = np.asarray(xstar, float)
    worst = -math.inf
    for r in trace:
        v = (np.sum((r.x_next - xstar) ** 2)
             - (1.0 - 2.0 * modulus * r.lam) * np.sum((r.x - xstar) ** 2)
             - 2.0 * r.beta ** 2)
        worst = max(worst, float(v))
    return worst


def sample_feasible(S: FeasibleSet, rng: np.random.Generator, m: int, scale: float = 10.0) -> np.ndarray:
    """``m`` random points of ``S`` (rejection sampling on the box, projection as fallback)."""
    if isinstance(S, WholeSpace):
        return rng.normal(scale=scale, size=(m, S.dim))
    lo = np.where(np.isfinite(S.lo), S.lo, -scale)
    hi = np.where(np.isfinite(S.hi), S.hi, scale)
    hi = np.maximum(hi, lo)
    pts = rng.uniform(lo, hi, size=(m, S.dim))
    if isinstance(S, BoxSum):
        for i, p in enumerate(pts):
            if not contains_point(S, p, 0.0):
                pts[i] = project(S, p)
    return pts


def property_violations(F: SplitBifunction, S: FeasibleSet, rng, m: int = 1000) -> dict:
    """Worst sampled violations of ``f_i(x,x)=0``, the subgradient inequality and monotonicity.

    Every value is >= 0, and 0 means no violation was observed.
    """
    X = sample_feasible(S, rng, m)
    Y = sample_feasible(S, rng, m)
    diag = subg = mono = 0.0
    for x, y in zip(X, Y):
        diag = max(diag, abs(F.eval1(x, x)), abs(F.eval2(x, x)))
        for ev, sg in ((F.eval1, F.diag_subgrad1), (F.eval2, F.diag_subgrad2)):
            subg = max(subg, -(ev(x, y) - sg(x) @ (y - x)))
        mono = max(mono, eval_sum(F, x, y) + eval_sum(F, y, x))
    return {"diagonal": diag, "subgradient": subg, "monotonicity": mono}
