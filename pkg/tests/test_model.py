import numpy as np
import pytest

from ccmv import (
    ProblemSpec,
    ReturnsMatrix,
    SolverConfig,
    estimate_moments,
    make_feasible_point,
    max_eigenvalue,
    objective_f,
    penalty_q,
    validate_problem,
)
from ccmv.errors import (
    AsymmetricA,
    BadConfig,
    BadData,
    BadDimension,
    BadK,
    BadTau,
    InsufficientData,
    NotPSD,
)


class TestReturnsMatrix:
    def test_single_period_rejected(self):
        with pytest.raises(InsufficientData):
            ReturnsMatrix(np.array([[0.1, 0.2]]), ("A", "B"))

    def test_nan_rejected(self):
        with pytest.raises(BadData):
            ReturnsMatrix(np.array([[0.1], [np.nan]]), ("A",))

    def test_ticker_mismatch(self):
        with pytest.raises(BadDimension):
            ReturnsMatrix(np.array([[0.1, 0.2], [0.0, 0.1]]), ("A",))


class TestEstimateMoments:
    def test_two_periods_one_asset(self):
        rm = ReturnsMatrix(np.array([[0.1], [0.3]]), ("A",))
        est = estimate_moments(rm)
        assert est.mu[0] == pytest.approx(0.2)
        assert est.A[0, 0] == pytest.approx(0.02)

    def test_constant_column_zero_variance(self):
        rm = ReturnsMatrix(np.array([[0.1, 0.0], [0.1, 0.2], [0.1, 0.1]]), ("A", "B"))
        est = estimate_moments(rm)
        assert est.A[0, 0] == pytest.approx(0.0, abs=1e-30)

    def test_duplicated_column_rank_one(self):
        rng = np.random.default_rng(3)
        col = rng.normal(size=5)
        rm = ReturnsMatrix(np.column_stack([col, col]), ("A", "B"))
        est = estimate_moments(rm)
        assert est.A[0, 1] == pytest.approx(est.A[0, 0])
        assert np.linalg.matrix_rank(est.A, tol=1e-12) == 1

    def test_covariance_psd_random_directions(self):
        rng = np.random.default_rng(11)
        rm = ReturnsMatrix(rng.normal(0.01, 0.05, size=(12, 5)),
                           tuple("ABCDE"))
        est = estimate_moments(rm)
        for _ in range(100):
            v = rng.standard_normal(5)
            assert v @ est.A @ v >= -1e-10


class TestValidateProblem:
    def test_identity_ok(self):
        validate_problem(ProblemSpec(np.eye(2), np.zeros(2), tau=0.5, k=1))

    def test_negative_eigenvalue(self):
        with pytest.raises(NotPSD):
            validate_problem(ProblemSpec(np.diag([1.0, -0.1]), np.zeros(2), tau=0.5, k=1))

    def test_k_too_large(self):
        with pytest.raises(BadK):
            validate_problem(ProblemSpec(np.eye(2), np.zeros(2), tau=0.5, k=3))

    def test_asymmetric(self):
        A = np.array([[1.0, 0.2], [0.1, 1.0]])
        with pytest.raises(AsymmetricA):
            validate_problem(ProblemSpec(A, np.zeros(2), tau=0.5, k=1))

    def test_bad_tau(self):
        with pytest.raises(BadTau):
            validate_problem(ProblemSpec(np.eye(2), np.zeros(2), tau=0.0, k=1))


class TestSolverConfig:
    def test_defaults_valid(self):
        cfg = SolverConfig()
        assert cfg.zeta == 10.0 and cfg.eps_inner == 1e-4

    @pytest.mark.parametrize("kwargs", [
        {"rho0": 0.0}, {"zeta": 1.0}, {"eps_inner": 0.0},
        {"max_outer": 0}, {"upsilon_slack": -1.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(BadConfig):
            SolverConfig(**kwargs)


class TestMaxEigenvalue:
    def test_diagonal(self):
        assert max_eigenvalue(np.diag([1.0, 3.0])) == pytest.approx(3.0, rel=1e-8)

    def test_identity(self):
        assert max_eigenvalue(np.eye(7)) == pytest.approx(1.0, rel=1e-8)

    def test_rank_one(self):
        v = np.array([1.0, 2.0, 1.0, 1.0])  # ||v||^2 = 7
        assert max_eigenvalue(np.outer(v, v)) == pytest.approx(7.0, rel=1e-8)

    def test_rayleigh_lower_bound(self):
        rng = np.random.default_rng(5)
        G = rng.standard_normal((8, 8))
        A = G @ G.T
        lam = max_eigenvalue(A)
        for _ in range(100):
            x = rng.standard_normal(8)
            assert lam >= (x @ A @ x) / (x @ x) * (1 - 1e-8)

    def test_ones_orthogonal_to_top_eigenvector(self):
        # top eigenvector has zero overlap with the all-ones start
        v = np.array([1.0, -1.0]) / np.sqrt(2)
        A = 5.0 * np.outer(v, v) + np.eye(2)
        assert max_eigenvalue(A) == pytest.approx(6.0, rel=1e-6)


class TestMakeFeasiblePoint:
    def test_top_k_selection(self):
        spec = ProblemSpec(np.eye(5), np.array([0.3, 0.1, 0.2, 0.05, 0.0]), tau=1.0, k=2)
        np.testing.assert_array_equal(make_feasible_point(spec),
                                      [0.5, 0.0, 0.5, 0.0, 0.0])

    def test_k_equals_n_uniform(self):
        spec = ProblemSpec(np.eye(4), np.arange(4.0), tau=1.0, k=4)
        np.testing.assert_allclose(make_feasible_point(spec), 0.25)

    def test_tie_breaks_to_lowest_index(self):
        spec = ProblemSpec(np.eye(3), np.full(3, 0.1), tau=1.0, k=1)
        np.testing.assert_array_equal(make_feasible_point(spec), [1.0, 0.0, 0.0])

    def test_always_feasible(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            n = int(rng.integers(1, 12))
            k = int(rng.integers(1, n + 1))
            spec = ProblemSpec(np.eye(n), rng.normal(size=n), tau=1.0, k=k)
            x = make_feasible_point(spec)
            assert abs(x.sum() - 1.0) <= 1e-12
            assert x.min() >= 0.0
            assert np.count_nonzero(x) <= k


class TestObjectiveAndPenalty:
    def test_hand_value(self):
        spec = ProblemSpec(np.eye(3), np.array([0.3, 0.2, 0.1]), tau=1.0, k=1)
        assert objective_f(spec, np.array([1.0, 0, 0])) == pytest.approx(0.7)

    def test_zero_vector(self):
        spec = ProblemSpec(np.eye(2), np.array([0.1, 0.2]), tau=1.0, k=1)
        assert objective_f(spec, np.zeros(2)) == 0.0

    def test_tau_zero_symmetric(self):
        spec = ProblemSpec(np.eye(2), np.array([0.1, 0.2]), tau=1e-300, k=2)
        assert objective_f(spec, np.array([0.5, 0.5])) == pytest.approx(0.5)

    def test_dimension_mismatch(self):
        spec = ProblemSpec(np.eye(2), np.zeros(2), tau=1.0, k=1)
        with pytest.raises(BadDimension):
            objective_f(spec, np.zeros(3))

    def test_penalty_equals_objective_on_diagonal(self):
        rng = np.random.default_rng(23)
        G = rng.standard_normal((4, 4))
        spec = ProblemSpec(G @ G.T, rng.normal(size=4), tau=0.7, k=2)
        for _ in range(20):
            x = rng.standard_normal(4)
            assert penalty_q(spec, 3.0, x, x) == objective_f(spec, x)

    def test_penalty_hand_value(self):
        spec = ProblemSpec(np.zeros((2, 2)), np.zeros(2), tau=1.0, k=1)
        assert penalty_q(spec, 2.0, np.array([1.0, 0]), np.zeros(2)) == pytest.approx(2.0)

    def test_penalty_linear_in_rho(self):
        rng = np.random.default_rng(29)
        spec = ProblemSpec(np.eye(3), rng.normal(size=3), tau=0.5, k=1)
        x, y = rng.normal(size=3), rng.normal(size=3)
        d2 = float((x - y) @ (x - y))
        q1 = penalty_q(spec, 2.0, x, y)
        q2 = penalty_q(spec, 4.0, x, y)
        assert q2 - q1 == pytest.approx(2.0 * d2)
