import numpy as np
import pytest

from ccmv import ProblemSpec


def assert_feasible(spec, weights, support, k=None):
    """Exact feasibility of a reported portfolio: budget, sign, hard sparsity."""
    k = k if k is not None else spec.k
    weights = np.asarray(weights, dtype=float)
    assert abs(weights.sum() - 1.0) <= 1e-8
    assert weights.min() >= -1e-10
    assert len(support) <= k
    off = np.setdiff1d(np.arange(spec.n), np.array(support, dtype=int))
    assert np.all(weights[off] == 0.0), "off-support weights must be exact zeros"


@pytest.fixture
def toy_spec():
    """n=3 identity instance: global optimum for k=1 is e_0 with f = 0.7."""
    return ProblemSpec(A=np.eye(3), mu=np.array([0.3, 0.2, 0.1]), tau=1.0, k=1)
