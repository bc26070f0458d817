"""Step-size schedules ``beta_k`` and the derived ``(eta_k, lambda_k)`` rule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ContractError


@dataclass(frozen=True)
class HarmonicScale:
    """``beta_k = c / (k + 1)``: divergent sum, summable squares."""

    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ContractError("HarmonicScale needs a finite c > 0")

    def beta_at(self, k: int) -> float:
        if k < 0:
            raise ContractError("schedule index must be >= 0")
        return self.c / (k + 1)

    @property
    def descriptor(self) -> str:
        return f"{self.c:g}/(k+1)"


@dataclass(frozen=True)
class CustomSchedule:
    """Wraps an arbitrary ``k -> beta_k``.

    The caller is responsible for ``sum beta_k = inf`` and ``sum beta_k**2 < inf``;
    only positivity is checked, lazily, in :meth:`beta_at`.
    """

    fn: Callable[[int], float]
    descriptor: str = "custom"

    def beta_at(self, k: int) -> float:
        b = float(self.fn(k))
        if not (math.isfinite(b) and b > 0):
            raise ContractError(f"schedule produced beta_{k} = {b!r}; must be finite and > 0")
        return b


def step_size(beta: float, g1, g2) -> tuple[float, float]:
    """Return ``(eta, lam)`` with ``eta = max(beta, |g1|, |g2|)`` and ``lam = beta / eta``."""
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    if not (math.isfinite(beta) and beta > 0):
        raise ContractError("beta must be finite and > 0")
    if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
        raise ContractError("subgradients must be finite")
    eta = max(beta, float(np.linalg.norm(g1)), float(np.linalg.norm(g2)))
    return eta, beta / eta
