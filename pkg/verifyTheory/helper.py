import numpy as np

GRID_POINTS = 400
MEAN_MARGIN = 3.0
VARIANCE_LOW_FACTOR = 0.5
VARIANCE_HIGH_FACTOR = 2.0
VARIANCE_LOG_RANGE = (np.log(0.1), np.log(10.0))
OFFSET_RANGE = (0.0, 2.0)

def _weighted_kl_surface(means: np.ndarray, variances: np.ndarray, weights: np.ndarray, mu_grid: np.ndarray, var_grid: np.ndarray, mean_scale: float) -> np.ndarray:
    """
    (Internal Helper) sum_r w_r KL(N(mu_r, var_r) || N(mu, var)) on a (mu x var) grid, label-driven form

    The mean term is divided by the fixed mean_scale instead of the candidate
    variance, so the mean and variance parts of the objective separate.

    Returns:
        np.array: (len(mu_grid) x len(var_grid)) objective values
    """
    mu = mu_grid[:, None, None]
    var = var_grid[None, :, None]
    divergences = 0.5 * ((means - mu) ** 2 / mean_scale + variances / var - 1.0 - np.log(variances / var))

    return np.sum(weights * divergences, axis=-1)

def _grid_minimum(means, variances, weights, mu_grid, var_grid) -> (int, int):
    """
    (Internal Helper) Indices of the smallest objective value on a grid
    """
    surface = _weighted_kl_surface(means, variances, weights, mu_grid, var_grid, float(np.mean(variances)))

    return np.unravel_index(np.argmin(surface), surface.shape)

def _neighbourhood(grid: np.ndarray, index: int) -> (float, float):
    """
    (Internal Helper) The interval spanned by a grid point's two neighbours
    """
    low = grid[max(index - 1, 0)]
    high = grid[min(index + 1, grid.size - 1)]

    return low, high

def _draw_class_teachers(rng: np.random.Generator, region_count: int, b_c: float, bound_fn) -> (np.ndarray, np.ndarray, np.ndarray):
    """
    (Internal Helper) Variances, mean offsets and accuracies of one class, best teacher first

    Variances are log-uniform in [0.1, 10] and sorted ascending; offsets from the
    global mean are uniform in [0, 2] and sorted ascending; accuracies follow
    from the variances through the accuracy-variance bound, so they decrease.

    Returns:
        tuple: (variances, offsets, accuracies), each of length R
    """
    variances = np.sort(np.exp(rng.uniform(*VARIANCE_LOG_RANGE, size=region_count)))
    offsets = np.sort(rng.uniform(*OFFSET_RANGE, size=region_count))
    accuracies = np.array([bound_fn(b_c, np.sqrt(variance)) for variance in variances])

    return variances, offsets, accuracies
