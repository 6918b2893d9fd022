"""Seeded synthetic instances for benchmarks: factor-model covariance, uniform returns."""

from __future__ import annotations

import numpy as np

from .model import ProblemSpec


def factor_model_instance(n: int, k: int, tau: float = 0.5, seed: int = 0) -> ProblemSpec:
    """A = FF'/m + d*I with n x m standard-normal loadings, fully seeded.

    m = max(5, n // 20); d = 0.01 * trace(FF'/m) / n keeps the matrix well
    conditioned. mu is uniform on [0, 0.1].
    """
    rng = np.random.default_rng(seed)
    m = max(5, n // 20)
    F = rng.standard_normal((n, m))
    A = F @ F.T / m
    d = 0.01 * np.trace(A) / n
    A = A + d * np.eye(n)
    A = 0.5 * (A + A.T)
    mu = rng.uniform(0.0, 0.1, size=n)
    return ProblemSpec(A=A, mu=mu, tau=tau, k=k)


def monthly_returns_instance(n: int, k: int, tau: float = 0.5, seed: int = 0,
                             periods: int = 60) -> ProblemSpec:
    """Instance at realistic monthly-return scale, built through moment estimation."""
    from .model import ReturnsMatrix, estimate_moments

    rng = np.random.default_rng(seed)
    mean = rng.uniform(0.0, 0.02, size=n)
    m = max(3, n // 10)
    loadings = rng.standard_normal((n, m)) * 0.03
    factors = rng.standard_normal((periods, m))
    noise = rng.standard_normal((periods, n)) * 0.02
    R = mean + factors @ loadings.T + noise
    returns = ReturnsMatrix(R, tuple(f"A{i}" for i in range(n)))
    est = estimate_moments(returns)
    return ProblemSpec(A=est.A, mu=est.mu, tau=tau, k=k)


def random_psd_instance(n: int, k: int, tau: float = 0.5, seed: int = 0,
                        rank: int | None = None) -> ProblemSpec:
    """Dense random PSD instance for property harnesses."""
    rng = np.random.default_rng(seed)
    r = rank if rank is not None else n
    G = rng.standard_normal((n, r))
    A = G @ G.T / r + 1e-6 * np.eye(n)
    A = 0.5 * (A + A.T)
    mu = rng.uniform(0.0, 0.2, size=n)
    return ProblemSpec(A=A, mu=mu, tau=tau, k=k)
