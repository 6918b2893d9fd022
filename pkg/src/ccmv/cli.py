"""Command-line entry point: solve, backtest, compare, bench."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .backtest import BacktestConfig, gap, in_sample_stats, rolling_horizon
from .errors import CcmvError, TooLarge
from .model import (
    ProblemSpec,
    Solution,
    SolverConfig,
    STATUS_CONVERGED,
    estimate_moments,
)
from .oracle import brute_force_solve
from .padm import ccmv_padm_solve
from .pd import ccmv_pd_solve
from .serialize import (
    read_problem_json,
    read_returns_csv,
    read_solution_json,
    solution_to_json,
    write_trace_csv,
    write_weights_csv,
)
from .synthetic import factor_model_instance

log = logging.getLogger("ccmv")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_ITERATION_CAPPED = 2


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        rho0=args.rho0,
        zeta=args.zeta,
        eps_inner=args.eps_inner,
        eps_outer=args.eps_outer,
        max_inner=args.max_inner,
        max_outer=args.max_outer,
    )


def _solve_one(spec: ProblemSpec, solver: str, cfg: SolverConfig) -> Solution:
    if solver == "pd":
        return ccmv_pd_solve(spec, cfg)
    if solver == "padm":
        return ccmv_padm_solve(spec, cfg)
    return brute_force_solve(spec).to_solution()


def _load_spec(args) -> ProblemSpec:
    if args.spec:
        return read_problem_json(args.spec, tau=args.tau, k=args.k)
    if args.returns:
        returns = read_returns_csv(args.returns)
        if args.k is None:
            raise CcmvError("--k is required with --returns")
        est = estimate_moments(returns)
        return ProblemSpec(A=est.A, mu=est.mu, tau=args.tau, k=args.k)
    raise CcmvError("one of --spec or --returns is required")


def _emit(args, text: str, default_name: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    spec = _load_spec(args)
    sol = _solve_one(spec, args.solver, _solver_config(args))
    _emit(args, solution_to_json(sol), "solution.json")
    if args.emit == "csv" and args.out:
        write_trace_csv(Path(args.out).with_suffix(".trace.csv"), sol)
    return EXIT_OK if sol.status == STATUS_CONVERGED else EXIT_ITERATION_CAPPED


def cmd_backtest(args) -> int:
    if not args.returns:
        raise CcmvError("--returns is required for backtest")
    if args.k is None:
        raise CcmvError("--k is required for backtest")
    returns = read_returns_csv(args.returns)
    cfg = BacktestConfig(window=args.window, tau=args.tau, k=args.k,
                         solver_kind=args.solver, solver_cfg=_solver_config(args))
    report = rolling_horizon(returns, cfg)
    _emit(args, json.dumps(report.to_dict(), indent=2) + "\n", "backtest.json")
    if args.emit == "csv" and args.out:
        write_weights_csv(Path(args.out).with_suffix(".weights.csv"),
                          report.weights_by_window, returns.tickers)
    return EXIT_OK


def _stats_row(spec: ProblemSpec, sol: Solution) -> dict:
    ret, risk, sharpe = in_sample_stats(spec, sol.weights)
    return {
        "solver": sol.solver,
        "k": spec.k,
        "return": ret,
        "risk": risk,
        "sharpe": sharpe,
        "objective": sol.objective,
        "time": sol.wall_time,
        "status": sol.status,
    }


def cmd_compare(args) -> int:
    base_spec = _load_spec(args) if args.k is not None else None
    ks = args.k_sweep or ([args.k] if args.k is not None else None)
    if ks is None:
        raise CcmvError("--k or --k-sweep is required for compare")
    if base_spec is None:
        args.k = ks[0]
        base_spec = _load_spec(args)

    reference_sol = None
    if args.reference_file:
        reference_sol = read_solution_json(args.reference_file)

    rows = []
    for k in ks:
        spec = ProblemSpec(A=base_spec.A, mu=base_spec.mu, tau=base_spec.tau, k=k)
        per_solver: dict[str, dict] = {}
        for solver in args.solvers:
            try:
                sol = _solve_one(spec, solver, _solver_config(args))
            except TooLarge as exc:
                rows.append({"solver": solver, "k": k, "skipped": str(exc)})
                continue
            per_solver[solver] = _stats_row(spec, sol)
        if args.reference == "mosek-file" and reference_sol is not None:
            ref = _stats_row(spec, reference_sol)
        else:
            ref = per_solver.get(args.reference)
        for solver, row in per_solver.items():
            if ref is not None:
                row["return_gap"] = gap(row["return"], ref["return"])
                row["risk_gap"] = gap(row["risk"], ref["risk"])
                row["sharpe_gap"] = gap(row["sharpe"], ref["sharpe"])
            rows.append(row)

    _emit(args, json.dumps(rows, indent=2) + "\n", "compare.json")
    if args.emit == "csv" and args.out:
        _write_rows_csv(Path(args.out).with_suffix(".csv"), rows)
    return EXIT_OK


def _write_rows_csv(path: Path, rows: list[dict]) -> None:
    fields: list[str] = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def cmd_bench(args) -> int:
    rows = []
    for n in args.sizes:
        for k in args.k_sweep or [args.k or 10]:
            spec = factor_model_instance(n=n, k=k, tau=args.tau, seed=args.seed)
            for solver in args.solvers:
                if solver == "oracle":
                    continue
                t0 = time.perf_counter()
                sol = _solve_one(spec, solver, _solver_config(args))
                elapsed = time.perf_counter() - t0
                rows.append({
                    "n": n, "k": k, "solver": solver,
                    "time": elapsed, "log10_time": float(np.log10(max(elapsed, 1e-12))),
                    "objective": sol.objective, "status": sol.status,
                })
    rows.sort(key=lambda r: (r["n"], r["k"], r["solver"]))
    lines = ["n,k,solver,time,log10_time,objective,status"]
    lines += [f'{r["n"]},{r["k"]},{r["solver"]},{r["time"]!r},{r["log10_time"]!r},'
              f'{r["objective"]!r},{r["status"]}' for r in rows]
    _emit(args, "\n".join(lines) + "\n", "bench.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccmv",
                                     description="Cardinality-constrained mean-variance portfolio tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--spec", help="ProblemSpec JSON path")
        p.add_argument("--returns", help="returns CSV path")
        p.add_argument("--k", type=int, default=None, help="cardinality bound")
        p.add_argument("--tau", type=float, default=0.5, help="risk/return trade-off")
        p.add_argument("--solver", choices=["pd", "padm", "oracle"], default="pd")
        p.add_argument("--rho0", type=float, default=0.1)
        p.add_argument("--zeta", type=float, default=10.0)
        p.add_argument("--eps-inner", type=float, default=1e-4, dest="eps_inner")
        p.add_argument("--eps-outer", type=float, default=1e-4, dest="eps_outer")
        p.add_argument("--max-inner", type=int, default=1000, dest="max_inner")
        p.add_argument("--max-outer", type=int, default=50, dest="max_outer")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--emit", choices=["json", "csv"], default="json")

    p_solve = sub.add_parser("solve", help="solve one instance")
    common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_back = sub.add_parser("backtest", help="rolling-horizon backtest on a returns CSV")
    common(p_back)
    p_back.add_argument("--window", type=int, default=48, help="estimation window length")
    p_back.set_defaults(func=cmd_backtest)

    p_cmp = sub.add_parser("compare", help="solver-vs-solver table with gap columns")
    common(p_cmp)
    p_cmp.add_argument("--solvers", nargs="+", default=["pd", "padm"],
                       choices=["pd", "padm", "oracle"])
    p_cmp.add_argument("--reference", choices=["mosek-file", "oracle", "pd"], default="pd")
    p_cmp.add_argument("--reference-file", dest="reference_file",
                       help="external Solution JSON used as the gap reference")
    p_cmp.add_argument("--k-sweep", dest="k_sweep", type=int, nargs="+")
    p_cmp.set_defaults(func=cmd_compare)

    p_bench = sub.add_parser("bench", help="timing sweep on seeded synthetic instances")
    common(p_bench)
    p_bench.add_argument("--sizes", type=int, nargs="+", default=[226, 476])
    p_bench.add_argument("--solvers", nargs="+", default=["pd", "padm"],
                         choices=["pd", "padm"])
    p_bench.add_argument("--k-sweep", dest="k_sweep", type=int, nargs="+")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("CCMV_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (CcmvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
