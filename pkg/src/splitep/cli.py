"""
Command-line front end.

``splitep run`` solves one instance and prints a summary line;
``splitep table1`` sweeps the ten Cournot configurations and compares the
counts with reference values.

Exit codes: 0 converged and certified, 1 runtime failure, 2 usage error,
3 ran but the result did not pass certification.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import dataclass

import numpy as np

from .core import ContractError
from .problems import (
    CournotParams,
    OpParams,
    ProblemInstance,
    build_cournot,
    build_op,
    build_rotation,
    build_strongly_pseudomonotone,
    load_problem,
)
from .schedules import HarmonicScale
from .solver import Mode, SolverConfig, SolverError, run, write_trace_csv, write_trace_jsonl
from .verify import primal_residual, property_violations

EXIT_OK, EXIT_FAILURE, EXIT_USAGE, EXIT_UNCERTIFIED = 0, 1, 2, 3
CERTIFY_TOL = 1e-3

# per-problem defaults: (mode, beta scale, dimension, stopping tolerance)
DEFAULTS = {
    "cournot": (Mode.ERGODIC_RESTART, 10.0, 2, 1e-4),
    # plain steps shrink like beta_k, so the step-length test needs a tighter tolerance
    "op": (Mode.PLAIN, 10.0, 1, 1e-7),
    "rotation": (Mode.ERGODIC, 1.0, 2, 1e-4),
    "spm": (Mode.PLAIN, 1.0, 10, 1e-4),
}

# (n, beta scale) -> (total iterations, restarts, iterations since last restart)
TABLE1_REFERENCE = {
    (2, 10): (2, 0, 2),
    (3, 10): (639, 2, 9),
    (4, 10): (911, 2, 4),
    (5, 10): (1027, 2, 2),
    (10, 10): (1201, 1, 2),
    (10, 100): (266, 1, 2),
    (15, 10): (2967, 2, 2),
    (15, 100): (408, 1, 2),
    (20, 10): (5007, 2, 2),
    (20, 100): (539, 1, 2),
}


class UsageError(Exception):
    pass


@dataclass
class RunSummary:
    n: int
    schedule: str
    status: str
    iterations: int
    restarts: int
    since_restart: int
    residual: float
    seconds: float

    def line(self) -> str:
        return (f"n={self.n} beta={self.schedule} status={self.status} iterations={self.iterations} "
                f"restarts={self.restarts} since_restart={self.since_restart} "
                f"residual={self.residual:.3e} seconds={self.seconds:.3f}")


def build_instance(args) -> tuple[ProblemInstance, str]:
    """Instance and problem kind selected by ``--problem``, ``--n``, ``--param-file`` and ``--seed``."""
    if args.param_file:
        try:
            inst = load_problem(args.param_file)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read {args.param_file}: {exc}") from exc
        kind = inst.name
        if args.problem and args.problem != kind:
            raise UsageError(f"--problem {args.problem} conflicts with kind {kind!r} in {args.param_file}")
        return inst, kind

    kind = args.problem or "cournot"
    n = args.n if args.n is not None else DEFAULTS[kind][2]
    if n < 1:
        raise UsageError("--n must be >= 1")
    if kind == "cournot":
        return build_cournot(CournotParams.default(n)), kind
    if kind == "op":
        return build_op(OpParams(Q=2.0 * np.eye(n), box_lo=0.0, box_hi=2.0)), kind
    if kind == "rotation":
        if n != 2:
            raise UsageError("the rotation problem lives in dimension 2")
        return build_rotation(), kind
    x0 = None
    if args.seed is not None:
        x0 = np.random.default_rng(args.seed).uniform(-1.0, 1.0, n)
    return build_strongly_pseudomonotone(n, x0=x0), kind


def _config(args, kind) -> SolverConfig:
    mode, c, _, eps = DEFAULTS[kind]
    kw = {"stop_eps": eps if args.eps is None else args.eps}
    if args.tau is not None:
        kw["restart_tau"] = args.tau
    return SolverConfig(mode=Mode(args.mode) if args.mode else mode,
                        schedule=HarmonicScale(args.beta_c if args.beta_c is not None else c),
                        max_iter=args.max_iter, **kw)


def _write_trace(trace, path, n):
    with open(path, "w", newline="") as fh:
        if str(path).endswith(".jsonl"):
            write_trace_jsonl(trace, fh)
        else:
            write_trace_csv(trace, fh, n)


def solve(inst: ProblemInstance, cfg: SolverConfig):
    t0 = time.perf_counter()
    res = run(inst.bifunction, inst.feasible_set, inst.x0, cfg)
    seconds = time.perf_counter() - t0
    rho = primal_residual(inst.bifunction, inst.feasible_set, res.x)
    summary = RunSummary(inst.n, cfg.schedule.descriptor, res.status.value, res.iterations,
                         res.restarts, res.iters_since_restart, rho, seconds)
    return res, summary


def cmd_run(args) -> int:
    inst, kind = build_instance(args)
    cfg = _config(args, kind)
    try:
        res, summary = solve(inst, cfg)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if args.trace:
            _write_trace(exc.trace, args.trace, inst.n)
        return EXIT_FAILURE
    if args.trace:
        _write_trace(res.trace, args.trace, inst.n)
    print(summary.line())
    print("x = " + " ".join(f"{v:.6g}" for v in res.x))
    if args.seed is not None:
        v = property_violations(inst.bifunction, inst.feasible_set, np.random.default_rng(args.seed))
        print("sampled violations: " + " ".join(f"{k}={val:.3e}" for k, val in v.items()))
    certified = res.converged and summary.residual >= -CERTIFY_TOL
    return EXIT_OK if certified else EXIT_UNCERTIFIED


TABLE1_COLUMNS = ["n", "beta", "iterations", "restarts", "since_restart",
                  "ref_iterations", "ref_restarts", "ref_since_restart", "residual", "seconds"]


def table1_rows(max_iter=10_000, eps=None, tau=None):
    """Run every configuration; yields ``(row_dict, certified)`` in a fixed order."""
    for (n, c), ref in TABLE1_REFERENCE.items():
        kw = {}
        if eps is not None:
            kw["stop_eps"] = eps
        if tau is not None:
            kw["restart_tau"] = tau
        cfg = SolverConfig(mode=Mode.ERGODIC_RESTART, schedule=HarmonicScale(c), max_iter=max_iter, **kw)
        row = dict(n=n, beta=cfg.schedule.descriptor, ref_iterations=ref[0], ref_restarts=ref[1],
                   ref_since_restart=ref[2])
        try:
            res, s = solve(build_cournot(CournotParams.default(n)), cfg)
        except SolverError as exc:
            row.update(iterations="error", restarts="", since_restart="", residual=str(exc), seconds="")
            yield row, False
            continue
        row.update(iterations=s.iterations, restarts=s.restarts, since_restart=s.since_restart,
                   residual=s.residual, seconds=s.seconds)
        yield row, res.converged and s.residual >= -CERTIFY_TOL


def _fmt_cell(v):
    if isinstance(v, float):
        return f"{v:.3e}" if abs(v) < 1e-2 or abs(v) >= 1e4 else f"{v:.3f}"
    return str(v)


def cmd_table1(args) -> int:
    rows, ok = [], True
    widths = [max(len(c), 10) for c in TABLE1_COLUMNS]
    print("  ".join(c.rjust(w) for c, w in zip(TABLE1_COLUMNS, widths)))
    for row, certified in table1_rows(args.max_iter, args.eps, args.tau):
        rows.append(row)
        ok &= certified
        cells = [_fmt_cell(row[c]).rjust(w) for c, w in zip(TABLE1_COLUMNS, widths)]
        print("  ".join(cells) + ("" if certified else "  FAILED"))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=TABLE1_COLUMNS, lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return EXIT_OK if ok else EXIT_UNCERTIFIED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="splitep", description="Splitting gradient solver for equilibrium problems.")
    p.add_argument("-v", "--verbose", action="store_true", help="log solver warnings")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="solve one instance")
    r.add_argument("--problem", choices=sorted(DEFAULTS))
    r.add_argument("--n", type=int, help="dimension (number of firms for cournot)")
    r.add_argument("--param-file", help="JSON problem description with a 'kind' key")
    r.add_argument("--beta-c", type=float, help="schedule beta_k = c/(k+1)")
    r.add_argument("--mode", choices=[m.value for m in Mode])
    r.add_argument("--max-iter", type=int, default=10_000)
    r.add_argument("--eps", type=float, help="stopping tolerance (1e-7 for op, else 1e-4)")
    r.add_argument("--tau", type=float, help="restart threshold (default 1e-3)")
    r.add_argument("--trace", help="write the iteration trace (.csv or .jsonl)")
    r.add_argument("--seed", type=int,
                   help="seed for sampled property checks and the random start of spm")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("table1", help="Cournot sweep over ten (n, beta) configurations")
    t.add_argument("--csv", help="also write the table as CSV")
    t.add_argument("--max-iter", type=int, default=10_000)
    t.add_argument("--eps", type=float)
    t.add_argument("--tau", type=float)
    t.set_defaults(func=cmd_table1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ContractError) as exc:
        parser.print_usage(sys.stderr)
        print(f"splitep: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
