import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from utils.errors import InvalidArgumentError
from verifyTheory.gaussian import GaussianClassModel, TeacherEnsemble
from verifyTheory.main import (
    gaussian_kl,
    lkd_optimal_student,
    mtkd_optimal_student,
    lemma1_grid_search,
    accuracy_variance_bound,
    dirichlet_covariance,
    sample_ensemble,
    theorem_gaps,
    check_theorems,
)

def _single_class_ensemble(means, variances, accuracies, global_mean=0.0):
    teachers = tuple(GaussianClassModel([mu], [var]) for mu, var in zip(means, variances))
    return TeacherEnsemble(teachers, np.asarray(accuracies, dtype=float).reshape(-1, 1), [global_mean])

def _quadrature_kl(p, q):
    mu_p, var_p = p
    mu_q, var_q = q
    sd_p, sd_q = np.sqrt(var_p), np.sqrt(var_q)

    def integrand(x):
        return norm.pdf(x, mu_p, sd_p) * (norm.logpdf(x, mu_p, sd_p) - norm.logpdf(x, mu_q, sd_q))

    value, _ = integrate.quad(integrand, mu_p - 15 * sd_p, mu_p + 15 * sd_p, epsabs=1e-11, epsrel=1e-11, limit=200)
    return value

class TestGaussianKl:
    def test_same_distribution(self):
        assert gaussian_kl((0.3, 2.0), (0.3, 2.0)) == 0.0

    def test_unit_mean_shift(self):
        assert gaussian_kl((0.0, 1.0), (1.0, 1.0)) == pytest.approx(0.5, abs=1e-15)

    def test_variance_ratio(self):
        assert gaussian_kl((0.0, 1.0), (0.0, 2.0)) == pytest.approx(0.5 * (0.5 - 1 + np.log(2.0)), abs=1e-15)

    def test_matches_quadrature(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            p = (rng.uniform(-2, 2), rng.uniform(0.2, 3.0))
            q = (rng.uniform(-2, 2), rng.uniform(0.2, 3.0))
            assert gaussian_kl(p, q) == pytest.approx(_quadrature_kl(p, q), abs=1e-6)

    def test_non_positive_variance(self):
        with pytest.raises(InvalidArgumentError):
            gaussian_kl((0.0, 0.0), (0.0, 1.0))

class TestOptimalStudent:
    def test_analytic_case(self):
        ens = _single_class_ensemble([0.0, 0.0], [1.0, 4.0], [np.log(2.0), 0.0])
        _, variance = lkd_optimal_student(ens, 0)
        assert variance == pytest.approx(2.0, abs=1e-12)

    def test_equal_accuracies_reduce_to_uniform(self):
        ens = _single_class_ensemble([0.1, 0.7, -0.4], [0.5, 1.5, 3.0], [0.8, 0.8, 0.8])
        lkd = lkd_optimal_student(ens, 0)
        mtkd = mtkd_optimal_student(ens, 0)
        assert lkd[0] == pytest.approx(mtkd[0], abs=1e-15)
        assert lkd[1] == pytest.approx(mtkd[1], abs=1e-15)
        assert mtkd == pytest.approx((0.4 / 3, 5.0 / 3), abs=1e-15)

    def test_shift_invariance(self):
        rng = np.random.default_rng(1)
        ens = sample_ensemble(rng, 4, 3)
        shifted = TeacherEnsemble(ens.teachers, ens.accuracies + 2.5, ens.global_means)
        for c in range(3):
            np.testing.assert_allclose(lkd_optimal_student(shifted, c), lkd_optimal_student(ens, c), rtol=1e-12)

    def test_variance_is_convex_combination(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            ens = sample_ensemble(rng, 3, 4)
            for c in range(4):
                _, variances = ens.class_moments(c)
                _, variance = lkd_optimal_student(ens, c)
                assert variances.min() - 1e-12 <= variance <= variances.max() + 1e-12

    def test_matches_grid_search(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            ens = sample_ensemble(rng, 3, 1)
            expected_mean, expected_variance = lkd_optimal_student(ens, 0)
            mean, variance = lemma1_grid_search(ens, 0)
            assert mean == pytest.approx(expected_mean, rel=1e-3, abs=1e-3)
            assert variance == pytest.approx(expected_variance, rel=1e-3)

class TestTheorems:
    def test_no_violations(self):
        report = check_theorems(1000, seed=7)
        assert report["trials"] == 1000
        assert report["violations_t1"] == 0
        assert report["violations_t2"] == 0
        assert report["max_gap_t1"] <= 1e-9
        assert report["max_gap_t2"] <= 1e-9

    def test_inverted_ordering_violates(self):
        report = check_theorems(50, seed=7, inverted=True)
        assert report["violations_t1"] >= 1
        assert report["violations_t2"] >= 1

    def test_identical_teachers(self):
        ens = _single_class_ensemble([0.4, 0.4, 0.4], [1.3, 1.3, 1.3], [0.9, 0.7, 0.6], global_mean=0.1)
        variance_gaps, mean_gaps = theorem_gaps(ens)
        np.testing.assert_allclose(variance_gaps, 0.0, atol=1e-12)
        np.testing.assert_allclose(mean_gaps, 0.0, atol=1e-12)

    def test_deterministic(self):
        assert check_theorems(20, seed=3) == check_theorems(20, seed=3)

    def test_no_trials(self):
        with pytest.raises(InvalidArgumentError):
            check_theorems(0)

class TestSampleEnsemble:
    def test_ordering(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            ens = sample_ensemble(rng, 4, 3)
            for c in range(3):
                assert ens.satisfies_ordering(c)
                assert np.all(np.diff(ens.accuracies[:, c]) <= 0)

    def test_inverted_ordering(self):
        ens = sample_ensemble(np.random.default_rng(5), 4, 3, inverted=True)
        for c in range(3):
            assert not ens.satisfies_ordering(c)
            assert np.all(np.diff(ens.accuracies[:, c]) <= 0)

    def test_satisfies_ordering_by_hand(self):
        ens = _single_class_ensemble([0.1, 0.5, -0.9], [0.5, 1.0, 2.0], [0.9, 0.8, 0.7])
        assert ens.satisfies_ordering(0)
        swapped = _single_class_ensemble([0.1, 0.5, -0.9], [1.0, 0.5, 2.0], [0.9, 0.8, 0.7])
        assert not swapped.satisfies_ordering(0)

class TestAccuracyVarianceBound:
    def test_unit_margin(self):
        assert accuracy_variance_bound(1.0, 1.0) == pytest.approx(1 - np.exp(-0.5) / np.sqrt(2 * np.pi), abs=1e-15)
        assert accuracy_variance_bound(1.0, 1.0) == pytest.approx(0.75803, abs=1e-5)

    @pytest.mark.parametrize("b_c, expected", [(0.0, 0.6011), (100.0, 1.0)])
    def test_margin_endpoints(self, b_c, expected):
        assert accuracy_variance_bound(b_c, 1.0) == pytest.approx(expected, abs=1e-4)

    def test_strictly_decreasing(self):
        bounds = [accuracy_variance_bound(1.0, sigma) for sigma in np.linspace(0.3, 10.0, 200)]
        assert np.all(np.diff(bounds) < 0)

    def test_open_unit_interval(self):
        for b_c in (0.0, 0.5, 2.0):
            for sigma in (0.5, 1.0, 4.0):
                assert 0 < accuracy_variance_bound(b_c, sigma) < 1

    def test_non_positive_sigma(self):
        with pytest.raises(InvalidArgumentError):
            accuracy_variance_bound(1.0, 0.0)

class TestDirichletCovariance:
    def test_uniform_pair(self):
        assert dirichlet_covariance(np.array([1.0, 1.0]), 0, 1) == pytest.approx(-1 / 12, abs=1e-15)

    def test_uniform_triple(self):
        assert dirichlet_covariance(np.array([1.0, 1.0, 1.0]), 0, 1) == pytest.approx(-1 / 36, abs=1e-15)

    @pytest.mark.parametrize("nu", [[0.5, 0.5, 0.5], [1.0, 2.0, 3.0], [5.0, 1.0, 0.2, 2.0]])
    def test_monte_carlo(self, nu):
        rng = np.random.default_rng(6)
        draws = rng.dirichlet(nu, size=100000)
        products = (draws[:, 0] - draws[:, 0].mean()) * (draws[:, 1] - draws[:, 1].mean())
        standard_error = products.std() / np.sqrt(draws.shape[0])
        assert abs(products.mean() - dirichlet_covariance(np.array(nu), 0, 1)) <= 3 * standard_error

    def test_same_component(self):
        with pytest.raises(InvalidArgumentError):
            dirichlet_covariance(np.array([1.0, 1.0]), 1, 1)

    def test_non_positive_concentration(self):
        with pytest.raises(InvalidArgumentError):
            dirichlet_covariance(np.array([1.0, 0.0]), 0, 1)
