"""
Built-in equilibrium problems.

``cournot``
    Linear Cournot oligopoly with a joint production quota.  With
    ``f1(x, y) = (Bt x + mu - alpha).(y - x)`` and
    ``f2(x, y) = 1/2 y'By - 1/2 x'Bx`` where ``Bt`` has zero diagonal and
    ``delta_i`` elsewhere in row ``i``, and ``B = diag(2 delta)``.  Fixed
    costs ``xi`` drop out of every profit difference and are carried only as
    data.
``op``
    ``min 1/2 x'Qx - sum ln(1 + max(0, x_i))`` over a box, written as the
    equilibrium problem ``f(x, y) = phi(y) - phi(x)`` and split into the
    quadratic and the log part.
``rotation``
    ``f(x, y) = <Ax, y - x>`` on the plane with ``A`` a quarter-turn: monotone
    but not paramonotone; plain iterates spiral outward.
``spm``
    ``f(x, y) = <m x, y - x>`` on a box around 0; strongly monotone with
    modulus ``m``, unique solution 0.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import (
    Affine,
    Box,
    BoxSum,
    Component,
    ContractError,
    DiagonalQuadratic,
    FeasibleSet,
    GeneralQuadratic,
    SeparableLogBarrier,
    SplitBifunction,
    WholeSpace,
    ZERO_COMPONENT,
)


@dataclass
class ProblemInstance:
    name: str
    bifunction: SplitBifunction
    feasible_set: FeasibleSet
    x0: np.ndarray
    solution: Optional[np.ndarray] = None
    monotone: bool = True
    paramonotone: bool = True
    modulus: Optional[float] = None      # strong (pseudo)monotonicity modulus, when known
    objective: Optional[callable] = None  # phi for optimization-derived problems
    params: object = None

    @property
    def n(self) -> int:
        return self.bifunction.n


def _vec(v, n, name):
    a = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} must be finite")
    return a


# --------------------------------------------------------------------------
# Cournot

@dataclass
class CournotParams:
    n: int
    alpha: np.ndarray
    delta: np.ndarray
    mu: np.ndarray
    xi: np.ndarray
    box_lo: np.ndarray
    box_hi: np.ndarray
    sigma_lo: float
    sigma_hi: float
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        n = int(self.n)
        if n < 2:
            raise ContractError("Cournot model needs n >= 2 firms")
        self.n = n
        self.alpha = _vec(self.alpha, n, "alpha")
        self.delta = _vec(self.delta, n, "delta")
        self.mu = _vec(self.mu, n, "mu")
        self.xi = _vec(self.xi, n, "xi")
        self.box_lo = _vec(self.box_lo, n, "box_lo")
        self.box_hi = _vec(self.box_hi, n, "box_hi")
        if np.any(self.alpha <= 0) or np.any(self.delta <= 0) or np.any(self.mu <= 0):
            raise ContractError("alpha, delta and mu must be positive")
        if np.any(self.xi < 0):
            raise ContractError("xi must be nonnegative")
        if self.x0 is not None:
            self.x0 = _vec(self.x0, n, "x0")

    @classmethod
    def default(cls, n: int) -> "CournotParams":
        """The reference experiment: alpha=120, delta=1, mu=30, C_i=[10,50], quota [10n+10, 50n-10], x0=30."""
        return cls(n=n, alpha=120.0, delta=1.0, mu=30.0, xi=0.0, box_lo=10.0, box_hi=50.0,
                   sigma_lo=10.0 * n + 10.0, sigma_hi=50.0 * n - 10.0, x0=np.full(n, 30.0))

    @property
    def B_tilde(self) -> np.ndarray:
        Bt = np.repeat(self.delta[:, None], self.n, axis=1)
        np.fill_diagonal(Bt, 0.0)
        return Bt

    @property
    def B(self) -> np.ndarray:
        return np.diag(2.0 * self.delta)

    @property
    def is_symmetric(self) -> bool:
        return all(np.all(v == v[0]) for v in (self.alpha, self.delta, self.mu, self.box_lo, self.box_hi))


def cournot_symmetric_solution(p: CournotParams) -> Optional[np.ndarray]:
    """Equilibrium of a symmetric Cournot instance, or None if parameters differ across firms.

    On the ray ``x = s 1`` every firm sees the same marginal term
    ``(n + 1) delta s + mu - alpha``; the equilibrium is its root clipped to
    the feasible range of ``s`` (box and quota), which covers the interior,
    box-active and quota-active cases.
    """
    if not p.is_symmetric:
        return None
    n = p.n
    a, d, m = p.alpha[0], p.delta[0], p.mu[0]
    s_lo = max(p.box_lo[0], p.sigma_lo / n)
    s_hi = min(p.box_hi[0], p.sigma_hi / n)
    if s_lo > s_hi:
        raise ContractError("symmetric Cournot instance has an empty feasible ray")
    s = min(max((a - m) / ((n + 1) * d), s_lo), s_hi)
    return np.full(n, s)


def build_cournot(p: CournotParams) -> ProblemInstance:
    Bt, delta = p.B_tilde, p.delta
    lin = p.mu - p.alpha

    def c_of(x):
        return Bt @ x + lin

    f1 = Component(
        value=lambda x, y: (y - x) @ c_of(x),
        subgrad=c_of,
        spec=lambda x: Affine(c_of(x)),
    )
    f2 = Component(
        value=lambda x, y: (y * y) @ delta - (x * x) @ delta,
        subgrad=lambda x: 2.0 * delta * x,
        spec=lambda x: DiagonalQuadratic(delta),
    )
    S = BoxSum(p.box_lo, p.box_hi, p.sigma_lo, p.sigma_hi)
    x0 = p.x0 if p.x0 is not None else np.full(p.n, 30.0)
    # f(x,y) + f(y,x) = -(y-x)' Bt (y-x) and Bt is indefinite, so the bifunction
    # itself is not monotone even though x -> (Bt + B) x + mu - alpha is.
    return ProblemInstance(
        name="cournot", bifunction=SplitBifunction(p.n, f1, f2), feasible_set=S,
        x0=np.array(x0, dtype=float), solution=cournot_symmetric_solution(p), params=p,
        monotone=False,
    )


# --------------------------------------------------------------------------
# Optimization problem with a log term

@dataclass
class OpParams:
    Q: np.ndarray
    box_lo: np.ndarray
    box_hi: np.ndarray
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        n = Q.shape[0]
        if Q.shape != (n, n) or not np.allclose(Q, Q.T, atol=1e-12):
            raise ContractError("Q must be a symmetric square matrix")
        if np.linalg.eigvalsh(Q).min() < -1e-8:
            raise ContractError("Q must be positive semidefinite")
        self.Q = Q
        self.box_lo = _vec(self.box_lo, n, "box_lo")
        self.box_hi = _vec(self.box_hi, n, "box_hi")
        if np.any(self.box_lo < 0):
            warnings.warn("op box extends below 0, where -ln(1 + max(0, y)) is not convex; "
                          "subgradient and convergence guarantees do not apply", stacklevel=2)
        if self.x0 is not None:
            self.x0 = _vec(self.x0, n, "x0")


def op_objective(Q):
    Q = np.asarray(Q, dtype=float)

    def phi(x):
        x = np.asarray(x, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, Q, x) - np.log1p(np.maximum(x, 0.0)).sum(axis=-1)
    return phi


def build_op(p: OpParams) -> ProblemInstance:
    Q = p.Q
    n = Q.shape[0]
    diagonal = np.count_nonzero(Q - np.diag(np.diag(Q))) == 0
    half_diag = 0.5 * np.diag(Q).copy()

    def quad(v):
        return 0.5 * np.einsum("...i,ij,...j->...", v, Q, v)

    def logsum(v):
        return np.log1p(np.maximum(v, 0.0)).sum(axis=-1)

    if diagonal:
        spec1 = DiagonalQuadratic(half_diag)
    else:
        spec1 = GeneralQuadratic(Q)
    f1 = Component(value=lambda x, y: quad(y) - quad(x), subgrad=lambda x: Q @ x,
                   spec=lambda x: spec1)
    # at x_i = 0 the right derivative -1 is the only selection valid for y_i >= 0
    f2 = Component(
        value=lambda x, y: logsum(x) - logsum(y),
        subgrad=lambda x: np.where(x >= 0, -1.0 / (1.0 + np.maximum(x, 0.0)), 0.0),
        spec=lambda x: SeparableLogBarrier(1.0),
    )
    S = Box(p.box_lo, p.box_hi)
    if p.x0 is not None:
        x0 = p.x0
    else:
        x0 = np.clip(0.5 * (p.box_lo + p.box_hi), p.box_lo, p.box_hi)
        x0 = np.where(np.isfinite(x0), x0, np.clip(0.0, p.box_lo, p.box_hi))
    return ProblemInstance(name="op", bifunction=SplitBifunction(n, f1, f2), feasible_set=S,
                           x0=np.array(x0, dtype=float), objective=op_objective(Q), params=p)


# --------------------------------------------------------------------------
# Rotation counterexample and strongly monotone linear instance

ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]])


def _linear_vi_component(A):
    return Component(
        value=lambda x, y: (y - x) @ (A @ x),
        subgrad=lambda x: A @ x,
        spec=lambda x: Affine(A @ x),
    )


def build_rotation() -> ProblemInstance:
    F = SplitBifunction(2, _linear_vi_component(ROTATION), ZERO_COMPONENT)
    return ProblemInstance(name="rotation", bifunction=F, feasible_set=WholeSpace(2),
                           x0=np.array([1.0, 0.0]), solution=np.zeros(2), paramonotone=False)


def build_strongly_pseudomonotone(n: int = 10, modulus: float = 1.0, lo=-1.0, hi=1.0,
                                  x0=None) -> ProblemInstance:
    if not modulus > 0:
        raise ContractError("modulus must be > 0")
    lo = _vec(lo, n, "lo")
    hi = _vec(hi, n, "hi")
    if not (np.all(lo < 0) and np.all(hi > 0)):
        raise ContractError("box must contain 0 in its interior")
    F = SplitBifunction(n, _linear_vi_component(modulus * np.eye(n)), ZERO_COMPONENT)
    x0 = np.clip(0.5 * hi, lo, hi) if x0 is None else _vec(x0, n, "x0")
    return ProblemInstance(name="spm", bifunction=F, feasible_set=Box(lo, hi), x0=x0,
                           solution=np.zeros(n), modulus=modulus)


# --------------------------------------------------------------------------
# JSON parameter files

def problem_from_dict(d: dict, n: Optional[int] = None) -> ProblemInstance:
    """Build an instance from a parameter mapping with a ``kind`` key.

    Scalars are broadcast to length ``n``.  Unknown keys are rejected.
    """
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "cournot":
        n = int(d.pop("n", n if n is not None else 0))
        base = CournotParams.default(n)
        allowed = {"alpha", "delta", "mu", "xi", "box_lo", "box_hi", "sigma_lo", "sigma_hi", "x0"}
        _reject_unknown(d, allowed)
        kw = {k: getattr(base, k) for k in allowed}
        kw.update(d)
        return build_cournot(CournotParams(n=n, **kw))
    if kind == "op":
        _reject_unknown(d, {"Q", "box_lo", "box_hi", "x0"})
        if "Q" not in d:
            raise ContractError("op problem needs Q")
        Q = np.atleast_2d(np.asarray(d["Q"], dtype=float))
        return build_op(OpParams(Q=Q, box_lo=d.get("box_lo", 0.0), box_hi=d.get("box_hi", 1.0),
                                 x0=d.get("x0")))
    if kind == "rotation":
        _reject_unknown(d, set())
        return build_rotation()
    if kind == "spm":
        _reject_unknown(d, {"n", "modulus", "lo", "hi", "x0"})
        nn = int(d.get("n", n if n is not None else 10))
        return build_strongly_pseudomonotone(nn, float(d.get("modulus", 1.0)), d.get("lo", -1.0),
                                             d.get("hi", 1.0), d.get("x0"))
    raise ContractError(f"unknown problem kind {kind!r}")


def _reject_unknown(d, allowed):
    extra = set(d) - set(allowed)
    if extra:
        raise ContractError(f"unknown parameter(s): {sorted(extra)}")


def load_problem(path) -> ProblemInstance:
    with open(Path(path)) as fh:
        return problem_from_dict(json.load(fh))
