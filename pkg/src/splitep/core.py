"""
Domain types: feasible sets, prox specifications and split bifunctions.

A bifunction ``f(x, y) = f1(x, y) + f2(x, y)`` is stored as two
:class:`Component` objects.  Each component knows how to evaluate itself, how
to produce a diagonal subgradient ``g in d_2 f_i(x, x)`` and which exact prox
solver applies to ``f_i(x, .)`` (see the ``ProxSpec`` classes below).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

CONTAINMENT_TOL = 1e-9


class ContractError(ValueError):
    """Raised when an input violates a documented precondition."""


class InfeasibleError(ContractError):
    """Raised when a feasible set is empty."""


def as_vector(x, n: Optional[int] = None, name: str = "x") -> np.ndarray:
    """Copy ``x`` into a finite 1-D float array, optionally checking its length."""
    v = np.atleast_1d(np.array(x, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise ContractError(f"{name} must be a non-empty 1-D vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise ContractError(f"{name} has dimension {v.size}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ContractError(f"{name} contains non-finite entries")
    return v


# --------------------------------------------------------------------------
# Feasible sets

@dataclass(frozen=True)
class WholeSpace:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ContractError("dimension must be >= 1")

    @property
    def dim(self) -> int:
        return self.n

    @property
    def lo(self) -> np.ndarray:
        return np.full(self.n, -np.inf)

    @property
    def hi(self) -> np.ndarray:
        return np.full(self.n, np.inf)


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float).reshape(-1)
        hi = np.array(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise ContractError("box bounds must be non-empty vectors of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ContractError("box bounds contain NaN")
        if np.any(lo > hi):
            raise InfeasibleError("box has lo > hi in some coordinate")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size


@dataclass(frozen=True, eq=False)
class BoxSum(Box):
    """Box intersected with the slab ``sum_lo <= sum(x) <= sum_hi``."""

    sum_lo: float = -np.inf
    sum_hi: float = np.inf

    def __post_init__(self):
        super().__post_init__()
        if np.isnan(self.sum_lo) or np.isnan(self.sum_hi) or self.sum_lo > self.sum_hi:
            raise InfeasibleError("sum interval is empty")
        if self.lo.sum() > self.sum_hi or self.hi.sum() < self.sum_lo:
            raise InfeasibleError("box and sum interval do not intersect")


FeasibleSet = Union[WholeSpace, Box, BoxSum]


def contains_point(S: FeasibleSet, x, tol: float = CONTAINMENT_TOL) -> bool:
    """True iff ``x`` satisfies every constraint of ``S`` up to additive ``tol``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (S.dim,):
        raise ContractError(f"point has shape {x.shape}, set has dimension {S.dim}")
    if not np.all(np.isfinite(x)):
        return False
    if isinstance(S, WholeSpace):
        return True
    if np.any(x < S.lo - tol) or np.any(x > S.hi + tol):
        return False
    if isinstance(S, BoxSum):
        s = x.sum()
        return bool(S.sum_lo - tol <= s <= S.sum_hi + tol)
    return True


# --------------------------------------------------------------------------
# Prox specifications.  Each describes f_i(x, .) up to an additive constant.

@dataclass(frozen=True)
class Zero:
    """``f_i(x, .) == 0``."""


@dataclass(frozen=True, eq=False)
class Affine:
    """``f_i(x, y) = c . y + const``."""

    c: np.ndarray


@dataclass(frozen=True, eq=False)
class DiagonalQuadratic:
    """``f_i(x, y) = sum_j delta_j y_j**2 + c . y + const``, i.e. ``1/2 y^T diag(2 delta) y``."""

    delta: np.ndarray
    c: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class GeneralQuadratic:
    """``f_i(x, y) = 1/2 y^T Q y + c . y + const`` with ``Q`` symmetric psd."""

    Q: np.ndarray
    c: Optional[np.ndarray] = None

    @property
    def lipschitz(self) -> float:
        return float(np.linalg.norm(self.Q, 2))

    def grad(self, y):
        g = self.Q @ y
        return g if self.c is None else g + self.c


@dataclass(frozen=True)
class SeparableLogBarrier:
    """``f_i(x, y) = -scale * sum_j ln(1 + max(0, y_j)) + const``."""

    scale: float = 1.0


@dataclass(frozen=True)
class GenericSmooth:
    """Black-box smooth convex ``f_i(x, .)`` with gradient and smoothness bound."""

    grad: Callable[[np.ndarray], np.ndarray]
    lipschitz: float


ProxSpec = Union[Zero, Affine, DiagonalQuadratic, GeneralQuadratic, SeparableLogBarrier, GenericSmooth]


# --------------------------------------------------------------------------
# Bifunctions

@dataclass(frozen=True)
class Component:
    """One summand ``f_i`` of a split bifunction.

    ``value(x, y)`` must broadcast over leading axes of ``y`` (a stack of
    points of shape ``(m, n)`` returns ``m`` values); the brute-force oracle
    relies on it.
    """

    value: Callable[[np.ndarray, np.ndarray], Union[float, np.ndarray]]
    subgrad: Callable[[np.ndarray], np.ndarray]
    spec: Callable[[np.ndarray], ProxSpec]


ZERO_COMPONENT = Component(
    value=lambda x, y: np.zeros(np.shape(y)[:-1]) if np.ndim(y) > 1 else 0.0,
    subgrad=lambda x: np.zeros_like(x),
    spec=lambda x: Zero(),
)


@dataclass(frozen=True)
class SplitBifunction:
    n: int
    f1: Component
    f2: Component = field(default=ZERO_COMPONENT)

    def _check(self, *vs):
        for v in vs:
            if np.shape(v) != (self.n,):
                raise ContractError(f"vector of shape {np.shape(v)} given to a bifunction on R^{self.n}")

    def eval1(self, x, y) -> float:
        self._check(x, y)
        return float(self.f1.value(np.asarray(x, float), np.asarray(y, float)))

    def eval2(self, x, y) -> float:
        self._check(x, y)
        return float(self.f2.value(np.asarray(x, float), np.asarray(y, float)))

    def diag_subgrad1(self, x) -> np.ndarray:
        self._check(x)
        return np.asarray(self.f1.subgrad(np.asarray(x, float)), dtype=float)

    def diag_subgrad2(self, x) -> np.ndarray:
        self._check(x)
        return np.asarray(self.f2.subgrad(np.asarray(x, float)), dtype=float)

    def prox_spec1(self, x) -> ProxSpec:
        return self.f1.spec(np.asarray(x, float))

    def prox_spec2(self, x) -> ProxSpec:
        return self.f2.spec(np.asarray(x, float))

    def eval_batch(self, x, Y) -> np.ndarray:
        """``f(x, y)`` for every row ``y`` of ``Y``."""
        x = np.asarray(x, float)
        Y = np.atleast_2d(np.asarray(Y, float))
        return np.asarray(self.f1.value(x, Y), float) + np.asarray(self.f2.value(x, Y), float)


def eval_sum(F: SplitBifunction, x, y) -> float:
    """``f(x, y) = f1(x, y) + f2(x, y)``."""
    return F.eval1(x, y) + F.eval2(x, y)
