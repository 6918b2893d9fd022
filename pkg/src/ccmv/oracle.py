"""Brute-force global solver for small instances.

Ground truth for the local solvers: enumerates every size-k support and, within
each, every zero-pattern, solving the equality-constrained system exactly.
Exponential on purpose; guarded by a combinatorial budget.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .model import (
    ProblemSpec,
    Solution,
    STATUS_CONVERGED,
    objective_f,
    validate_problem,
)

log = logging.getLogger("ccmv")

MAX_SUPPORTS = 10**6
MAX_SUPPORT_SIZE = 20


def restricted_qp_solve(spec: ProblemSpec, support) -> tuple[np.ndarray, float]:
    """Exact global solve restricted to a support, by zero-pattern enumeration.

    Keeps the least-objective candidate that is primal feasible with
    nonnegative multipliers on its fixed-at-zero coordinates.
    """
    support = tuple(sorted(int(i) for i in support))
    if not 1 <= len(support) <= MAX_SUPPORT_SIZE:
        raise TooLarge(f"support size {len(support)} outside [1, {MAX_SUPPORT_SIZE}]")
    best_x, best_f = None, np.inf
    for r in range(len(support), 0, -1):
        for pattern in itertools.combinations(support, r):
            idx = np.array(pattern)
            m = idx.size
            K = np.zeros((m + 1, m + 1))
            K[:m, :m] = 2.0 * spec.A[np.ix_(idx, idx)]
            K[:m, m] = 1.0
            K[m, :m] = 1.0
            rhs = np.append(spec.tau * spec.mu[idx], 1.0)
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                log.debug("oracle: singular pattern %s skipped", pattern)
                continue
            xs, beta = sol[:m], float(sol[m])
            if xs.min() < -1e-12:
                continue
            x = np.zeros(spec.n)
            x[idx] = np.maximum(xs, 0.0)
            x[idx] += (1.0 - x.sum()) / m
            # multipliers of the coordinates this pattern pins to zero
            g = 2.0 * (spec.A @ x) - spec.tau * spec.mu
            zero_idx = [i for i in support if i not in pattern]
            if zero_idx and min(g[i] + beta for i in zero_idx) < -1e-9:
                continue
            fx = objective_f(spec, x)
            if fx < best_f:
                best_x, best_f = x, fx
    if best_x is None:  # pragma: no cover - full pattern always yields a candidate
        raise TooLarge(f"no feasible candidate found within support {support}")
    return best_x, best_f


@dataclass
class OracleResult:
    """Globally optimal portfolio of a small instance."""

    x: np.ndarray
    support: tuple[int, ...]
    objective: float
    supports_examined: int

    def to_solution(self) -> Solution:
        spec_support = tuple(int(i) for i in np.flatnonzero(self.x != 0.0))
        return Solution(
            weights=self.x,
            support=spec_support,
            objective=self.objective,
            kkt=None,
            status=STATUS_CONVERGED,
            solver="oracle",
        )


def brute_force_solve(spec: ProblemSpec) -> OracleResult:
    """Global minimum of the k-sparse problem by exhaustive support enumeration."""
    validate_problem(spec)
    n, k = spec.n, spec.k
    n_supports = math.comb(n, k)
    if n_supports > MAX_SUPPORTS:
        raise TooLarge(f"C({n},{k}) = {n_supports} exceeds budget {MAX_SUPPORTS}")
    t0 = time.perf_counter()
    best: tuple[float, tuple[int, ...], np.ndarray] | None = None
    for support in itertools.combinations(range(n), k):
        x, fx = restricted_qp_solve(spec, support)
        key = (fx, support)
        if best is None or key < (best[0], best[1]):
            best = (fx, support, x)
    fx, support, x = best
    log.debug("oracle examined %d supports in %.3fs", n_supports, time.perf_counter() - t0)
    return OracleResult(x=x, support=support, objective=fx, supports_examined=n_supports)
