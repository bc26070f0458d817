"""
Splitting gradient iteration with plain, ergodic and restarted-ergodic modes.

One iteration from ``x``:

1. ``g1, g2`` = diagonal subgradients of ``f1, f2`` at ``x``;
2. ``eta = max(beta, |g1|, |g2|)``, ``lam = beta / eta``;
3. ``y      = argmin lam f1(x, .) + 1/2 |. - x|^2`` over ``S``;
4. ``x_next = argmin lam f2(x, .) + 1/2 |. - y|^2`` over ``S``.

The ergodic point is the ``lam``-weighted mean of ``x^0, ..., x^k``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
import math
from dataclasses import dataclass, field, fields, replace
from typing import Iterable, List, Optional

import numpy as np

from .core import CONTAINMENT_TOL, ContractError, FeasibleSet, SplitBifunction, as_vector, contains_point
from .prox import ProxInfo, project, prox
from .schedules import HarmonicScale, step_size

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    PLAIN = "plain"
    ERGODIC = "ergodic"
    ERGODIC_RESTART = "ergodic-restart"


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIterReached"


class SolverError(RuntimeError):
    """A subproblem failed; ``trace`` holds the records completed before the failure."""

    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


@dataclass(frozen=True)
class SolverConfig:
    mode: Mode = Mode.ERGODIC_RESTART
    schedule: object = field(default_factory=lambda: HarmonicScale(10.0))
    max_iter: int = 10_000
    stop_eps: float = 1e-4
    restart_tau: float = 1e-3
    reset_schedule_on_restart: bool = True
    reset_ergodic_on_restart: bool = True
    prox_tol: float = 1e-10
    prox_max_iter: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.max_iter < 1:
            raise ContractError("max_iter must be >= 1")
        if not self.restart_tau > 0 or not self.stop_eps > 0:
            raise ContractError("stop_eps and restart_tau must be > 0")
        if self.mode is Mode.ERGODIC_RESTART and self.stop_eps >= self.restart_tau:
            log.warning("stop_eps >= restart_tau: the restart test can never fire before the stop test")


@dataclass(frozen=True)
class SolverState:
    k: int                      # total iterations done
    x: np.ndarray               # current iterate x^k
    y: Optional[np.ndarray]     # last intermediate point
    lambda_sum: float
    z_num: np.ndarray
    z: Optional[np.ndarray]
    last_z: Optional[np.ndarray]
    restart_count: int = 0
    iters_since_restart: int = 0
    schedule_index: int = 0

    @classmethod
    def initial(cls, x0):
        x0 = np.asarray(x0, dtype=float)
        return cls(k=0, x=x0, y=None, lambda_sum=0.0, z_num=np.zeros_like(x0),
                   z=None, last_z=None)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    beta: float
    eta: float
    lam: float
    delta_z: float              # |z^k - z^{k-1}|; NaN when no previous ergodic point exists
    restarted: bool
    x: np.ndarray
    y: np.ndarray
    x_next: np.ndarray
    z: np.ndarray
    prox1_iters: int = 0
    prox2_iters: int = 0
    prox_residual: float = 0.0


@dataclass
class SolverResult:
    x: np.ndarray
    status: Status
    trace: List[IterationRecord]
    iterations: int
    restarts: int
    iters_since_restart: int
    warnings: List[str] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


def ergodic_point(state: SolverState) -> np.ndarray:
    """``sum_i lam_i x^i / sum_i lam_i`` over the iterates accumulated so far."""
    if not state.lambda_sum > 0:
        raise ContractError("no ergodic point before the first iteration")
    return state.z_num / state.lambda_sum


def iterate_once(F: SplitBifunction, S: FeasibleSet, state: SolverState, beta: float,
                 prox_tol=1e-10, prox_max_iter=100_000):
    """Advance one iteration; returns ``(new_state, record)``."""
    x = state.x
    g1 = F.diag_subgrad1(x)
    g2 = F.diag_subgrad2(x)
    eta, lam = step_size(beta, g1, g2)

    y, info1 = prox(F.prox_spec1(x), lam, x, S, prox_tol, prox_max_iter)
    x_next, info2 = prox(F.prox_spec2(x), lam, y, S, prox_tol, prox_max_iter)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x_next))):
        raise FloatingPointError(f"non-finite iterate at k={state.k}")

    lambda_sum = state.lambda_sum + lam
    z_num = state.z_num + lam * x
    z = z_num / lambda_sum
    dz = float(np.linalg.norm(z - state.z)) if state.z is not None else math.nan

    rec = IterationRecord(
        k=state.k, beta=beta, eta=eta, lam=lam, delta_z=dz, restarted=False,
        x=x, y=y, x_next=x_next, z=z,
        prox1_iters=info1.iterations, prox2_iters=info2.iterations,
        prox_residual=max(info1.residual, info2.residual),
    )
    new = replace(state, k=state.k + 1, x=x_next, y=y, lambda_sum=lambda_sum, z_num=z_num,
                  z=z, last_z=state.z, iters_since_restart=state.iters_since_restart + 1,
                  schedule_index=state.schedule_index + 1)
    return new, rec


def _restart(state: SolverState, cfg: SolverConfig) -> SolverState:
    kw = dict(restart_count=state.restart_count + 1, iters_since_restart=0)
    if cfg.reset_schedule_on_restart:
        kw["schedule_index"] = 0
    if cfg.reset_ergodic_on_restart:
        kw.update(lambda_sum=0.0, z_num=np.zeros_like(state.x), z=None, last_z=None)
    return replace(state, **kw)


def run(F: SplitBifunction, S: FeasibleSet, x0, cfg: Optional[SolverConfig] = None) -> SolverResult:
    """Run the splitting iteration from `x0` until the stopping test or ``cfg.max_iter``.

    Plain mode stops on ``|x^{k+1} - x^k| < stop_eps`` and returns the last
    iterate.  Ergodic modes stop on ``|z^k - z^{k-1}| < stop_eps`` and return
    the ergodic point.  With restarts, a step with
    ``stop_eps <= |z^k - z^{k-1}| <= restart_tau`` re-seeds the method at the
    newest iterate and (by default) resets the schedule and the averages.
    """
    cfg = cfg or SolverConfig()
    warnings = []
    x0 = as_vector(x0, F.n, "x0")
    if x0.size != S.dim:
        raise ContractError("x0 and feasible set dimensions differ")
    if not contains_point(S, x0, CONTAINMENT_TOL):
        x0 = project(S, x0)
        warnings.append("x0 was infeasible and has been projected onto the feasible set")
        log.warning(warnings[-1])

    state = SolverState.initial(x0)
    trace: List[IterationRecord] = []
    status = Status.MAX_ITER
    result = x0
    for _ in range(cfg.max_iter):
        beta = cfg.schedule.beta_at(state.schedule_index)
        try:
            state, rec = iterate_once(F, S, state, beta, cfg.prox_tol, cfg.prox_max_iter)
        except (ArithmeticError, RuntimeError, ContractError) as exc:
            raise SolverError(f"iteration {state.k} failed: {exc}", trace) from exc

        if cfg.mode is Mode.PLAIN:
            trace.append(rec)
            result = rec.x_next
            if np.linalg.norm(rec.x_next - rec.x) < cfg.stop_eps:
                status = Status.CONVERGED
                break
            continue

        result = rec.z
        if state.iters_since_restart >= 2:
            if rec.delta_z < cfg.stop_eps:
                trace.append(rec)
                status = Status.CONVERGED
                break
            if cfg.mode is Mode.ERGODIC_RESTART and rec.delta_z <= cfg.restart_tau:
                rec = replace(rec, restarted=True)
                state = _restart(state, cfg)
        trace.append(rec)

    return SolverResult(x=np.array(result), status=status, trace=trace, iterations=state.k,
                        restarts=state.restart_count, iters_since_restart=state.iters_since_restart,
                        warnings=warnings)


# --------------------------------------------------------------------------
# Trace serialization

_SCALARS = ("k", "beta", "eta", "lam", "delta_z", "restarted")
_VECTORS = ("x", "y", "x_next", "z")
_DIAG = ("prox1_iters", "prox2_iters", "prox_residual")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def csv_header(n: int) -> List[str]:
    cols = list(_SCALARS)
    for name in _VECTORS:
        cols += [f"{name}_{i}" for i in range(n)]
    return cols + list(_DIAG)


def write_trace_csv(trace: Iterable[IterationRecord], fh, n: Optional[int] = None):
    """Write one row per record; columns ``k, beta, eta, lam, delta_z, restarted``, then vectors."""
    trace = list(trace)
    if n is None:
        n = trace[0].x.size if trace else 0
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(csv_header(n))
    for r in trace:
        row = [_fmt(getattr(r, s)) for s in _SCALARS]
        for name in _VECTORS:
            row += [_fmt(v) for v in getattr(r, name)]
        row += [_fmt(getattr(r, s)) for s in _DIAG]
        w.writerow(row)


def read_trace_csv(fh) -> List[IterationRecord]:
    rows = list(csv.reader(fh))
    if not rows:
        return []
    header, body = rows[0], rows[1:]
    n = sum(1 for c in header if c.startswith("x_") and not c.startswith("x_next"))
    out = []
    for row in body:
        vals = dict(zip(header, row))
        kw = dict(k=int(vals["k"]), beta=float(vals["beta"]), eta=float(vals["eta"]),
                  lam=float(vals["lam"]), delta_z=float(vals["delta_z"]),
                  restarted=vals["restarted"] == "1",
                  prox1_iters=int(vals["prox1_iters"]), prox2_iters=int(vals["prox2_iters"]),
                  prox_residual=float(vals["prox_residual"]))
        for name in _VECTORS:
            kw[name] = np.array([float(vals[f"{name}_{i}"]) for i in range(n)])
        out.append(IterationRecord(**kw))
    return out


def _record_to_dict(r: IterationRecord) -> dict:
    d = {}
    for f in fields(IterationRecord):
        v = getattr(r, f.name)
        if isinstance(v, np.ndarray):
            d[f.name] = [float(a) for a in v]
        elif f.name == "delta_z" and math.isnan(v):
            d[f.name] = None
        else:
            d[f.name] = v
    return d


def write_trace_jsonl(trace: Iterable[IterationRecord], fh):
    """One JSON object per record, keys in the CSV column order; NaN is written as null."""
    for r in trace:
        fh.write(json.dumps(_record_to_dict(r)) + "\n")


def read_trace_jsonl(fh) -> List[IterationRecord]:
    out = []
    for line in fh:
        if not line.strip():
            continue
        d = json.loads(line)
        if d["delta_z"] is None:
            d["delta_z"] = math.nan
        for name in _VECTORS:
            d[name] = np.array(d[name], dtype=float)
        out.append(IterationRecord(**d))
    return out


def trace_to_csv_string(trace) -> str:
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    return buf.getvalue()
