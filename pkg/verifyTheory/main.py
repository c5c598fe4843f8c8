import numpy as np
from scipy.special import softmax

from utils.errors import InvalidArgumentError
from utils.pipeline import derive_rng
from verifyTheory.gaussian import GaussianClassModel, TeacherEnsemble
from verifyTheory.helper import (
    GRID_POINTS,
    MEAN_MARGIN,
    VARIANCE_LOW_FACTOR,
    VARIANCE_HIGH_FACTOR,
    _grid_minimum,
    _neighbourhood,
    _draw_class_teachers,
)

THEOREM_TOLERANCE = 1e-9

def gaussian_kl(p: tuple, q: tuple) -> float:
    """
    KL(N(mu_p, var_p) || N(mu_q, var_q)) = 1/2 [(mu_p - mu_q)^2 / var_q + var_p / var_q - 1 - ln(var_p / var_q)].

    Args:
        p (tuple): (mean, variance) of the first Gaussian
        q (tuple): (mean, variance) of the second Gaussian

    Raises:
        InvalidArgumentError: If a variance is not positive
    """
    mu_p, var_p = p
    mu_q, var_q = q
    if var_p <= 0 or var_q <= 0:
        raise InvalidArgumentError("variances must be positive")
    ratio = var_p / var_q

    return float(0.5 * ((mu_p - mu_q) ** 2 / var_q + ratio - 1.0 - np.log(ratio)))

def lkd_optimal_student(ens: TeacherEnsemble, c: int) -> (float, float):
    """
    Closed-form student moments of class c under accuracy-weighted distillation.

    Both the mean and the variance are averages of the teachers' moments with
    weights exp(tau_r) / sum_r' exp(tau_r').
    """
    means, variances = ens.class_moments(c)
    weights = softmax(ens.accuracies[:, c])

    return float(np.dot(weights, means)), float(np.dot(weights, variances))

def mtkd_optimal_student(ens: TeacherEnsemble, c: int) -> (float, float):
    """
    Student moments of class c when every teacher weighs the same.
    """
    means, variances = ens.class_moments(c)

    return float(np.mean(means)), float(np.mean(variances))

def lemma1_grid_search(ens: TeacherEnsemble, c: int, grid_points: int = GRID_POINTS) -> (float, float):
    """
    Numerically minimise sum_r exp(tau_r) KL(teacher_r || candidate) over candidate (mean, variance).

    The divergence is taken in its label-driven form, where the squared mean
    offset is scaled by the teachers' average variance rather than by the
    candidate's, so the mean and variance terms are minimised independently.
    The mean is searched over [min mu - 3, max mu + 3] and the variance over
    [0.5 min var, 2 max var] (log-spaced). A second grid of the same size over
    the neighbourhood of the coarse minimum refines the answer.

    Returns:
        tuple: (mean, variance) of the best grid point
    """
    means, variances = ens.class_moments(c)
    weights = np.exp(ens.accuracies[:, c])

    mu_grid = np.linspace(means.min() - MEAN_MARGIN, means.max() + MEAN_MARGIN, grid_points)
    var_grid = np.geomspace(VARIANCE_LOW_FACTOR * variances.min(), VARIANCE_HIGH_FACTOR * variances.max(), grid_points)
    i, j = _grid_minimum(means, variances, weights, mu_grid, var_grid)

    mu_grid = np.linspace(*_neighbourhood(mu_grid, i), grid_points)
    var_grid = np.geomspace(*_neighbourhood(var_grid, j), grid_points)
    i, j = _grid_minimum(means, variances, weights, mu_grid, var_grid)

    return float(mu_grid[i]), float(var_grid[j])

def accuracy_variance_bound(b_c: float, sigma: float) -> float:
    """
    Accuracy bound of a class whose decision margin is b_c under output noise sigma.

    1 - exp(-(b_c / sigma)^2 / 2) / sqrt(2 pi); it shrinks as sigma grows.

    Raises:
        InvalidArgumentError: If sigma is not positive
    """
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")

    return float(1.0 - np.exp(-0.5 * (b_c / sigma) ** 2) / np.sqrt(2.0 * np.pi))

def dirichlet_covariance(nu: np.ndarray, i: int, j: int) -> float:
    """
    Cov(pi_i, pi_j) = -nu_i nu_j / (nu_bar^2 (nu_bar + 1)) of a Dirichlet(nu) draw, nu_bar = sum nu.

    Raises:
        InvalidArgumentError: If i == j, an index is out of range or a concentration is not positive
    """
    nu = np.asarray(nu, dtype=np.float64).reshape(-1)
    if np.any(nu <= 0):
        raise InvalidArgumentError("concentrations must be positive")
    if i == j:
        raise InvalidArgumentError("the covariance formula needs two distinct components")
    if not (0 <= i < nu.size and 0 <= j < nu.size):
        raise InvalidArgumentError(f"components {i}, {j} out of range for {nu.size}")
    total = nu.sum()

    return float(-nu[i] * nu[j] / (total ** 2 * (total + 1.0)))

def sample_ensemble(rng: np.random.Generator, region_count: int, class_count: int, inverted: bool = False, b_c: float = 1.0) -> TeacherEnsemble:
    """
    Draw a random Gaussian teacher ensemble with consistently ordered teachers.

    Teacher 1 has the smallest variance, the smallest distance to the global
    class mean and the highest accuracy, class by class. For a given class all
    teachers sit on the same side of the global mean.

    Args:
        rng (np.random.Generator): Source of randomness
        region_count (int): Number of teachers R
        class_count (int): Number of classes C
        inverted (bool): Keep the accuracies but hand the largest variance and
                         offset to the most accurate teacher
        b_c (float): Shared decision margin of the accuracy-variance bound

    Returns:
        TeacherEnsemble: The ensemble
    """
    if region_count < 1 or class_count < 1:
        raise InvalidArgumentError("region and class counts must be positive")

    means = np.empty((region_count, class_count))
    variances = np.empty((region_count, class_count))
    accuracies = np.empty((region_count, class_count))
    global_means = rng.standard_normal(class_count)

    for c in range(class_count):
        class_variances, offsets, class_accuracies = _draw_class_teachers(rng, region_count, b_c, accuracy_variance_bound)
        side = 1.0 if rng.random() < 0.5 else -1.0
        if inverted:
            class_variances, offsets = class_variances[::-1], offsets[::-1]
        means[:, c] = global_means[c] + side * offsets
        variances[:, c] = class_variances
        accuracies[:, c] = class_accuracies

    teachers = tuple(GaussianClassModel(means[r], variances[r]) for r in range(region_count))

    return TeacherEnsemble(teachers, accuracies, global_means)

def theorem_gaps(ens: TeacherEnsemble) -> (np.ndarray, np.ndarray):
    """
    Per-class gaps of both comparisons against uniform distillation; a positive gap is a violation.

    Returns:
        tuple: (var_LKD - var_MTKD per class, |mu_LKD - mu_bar| - |mu_MTKD - mu_bar| per class)
    """
    variance_gaps = np.empty(ens.class_count)
    mean_gaps = np.empty(ens.class_count)
    for c in range(ens.class_count):
        lkd_mean, lkd_variance = lkd_optimal_student(ens, c)
        mtkd_mean, mtkd_variance = mtkd_optimal_student(ens, c)
        variance_gaps[c] = lkd_variance - mtkd_variance
        mean_gaps[c] = abs(lkd_mean - ens.global_means[c]) - abs(mtkd_mean - ens.global_means[c])

    return variance_gaps, mean_gaps

def check_theorems(trials: int, region_count: int = 3, class_count: int = 5, seed: int = 0, inverted: bool = False) -> dict:
    """
    Monte Carlo check that accuracy-weighted distillation beats uniform distillation.

    On every sampled ensemble and class, the distilled variance must not exceed
    the uniform one and the distilled mean must not be further from the global
    class mean, both up to 1e-9.

    Args:
        trials (int): Number of random ensembles, > 0
        region_count (int): Teachers per ensemble
        class_count (int): Classes per ensemble
        seed (int): Root seed; trial i draws from the stream "theory:trial:<i>"
        inverted (bool): Sample ensembles with the ordering reversed (negative control)

    Returns:
        dict: {'trials', 'violations_t1', 'violations_t2', 'max_gap_t1', 'max_gap_t2'}
    """
    if trials < 1:
        raise InvalidArgumentError(f"trials must be positive, got {trials}")

    violations_t1 = 0
    violations_t2 = 0
    max_gap_t1 = -np.inf
    max_gap_t2 = -np.inf
    for trial in range(trials):
        rng = derive_rng(seed, f"theory:trial:{trial}")
        ens = sample_ensemble(rng, region_count, class_count, inverted=inverted)
        variance_gaps, mean_gaps = theorem_gaps(ens)

        violations_t1 += int(np.any(variance_gaps > THEOREM_TOLERANCE))
        violations_t2 += int(np.any(mean_gaps > THEOREM_TOLERANCE))
        max_gap_t1 = max(max_gap_t1, float(variance_gaps.max()))
        max_gap_t2 = max(max_gap_t2, float(mean_gaps.max()))

    return {
        "trials": int(trials),
        "violations_t1": violations_t1,
        "violations_t2": violations_t2,
        "max_gap_t1": max_gap_t1,
        "max_gap_t2": max_gap_t2,
    }
