import numpy as np

from utils.errors import InvalidArgumentError

def _check_same_shapes(models: list) -> None:
    """
    (Internal Helper) Raise unless every model shares the first model's layer shapes
    """
    if len(models) == 0:
        raise InvalidArgumentError("at least one model is required")
    for model in models[1:]:
        if not models[0].same_shape(model):
            raise InvalidArgumentError(f"layer shapes differ: {models[0].layer_shapes} vs {model.layer_shapes}")

def _normalized_weights(weights, count: int) -> np.ndarray:
    """
    (Internal Helper) Validate aggregation weights and scale them to sum to one

    Args:
        weights (list or None): Non-negative weights, or None for the uniform 1/N
        count (int): Number of models being aggregated

    Returns:
        np.array: Weights summing to one
    """
    if weights is None:
        return np.full(count, 1.0 / count)

    weights = np.asarray(weights, dtype=np.float64).reshape(-1)
    if weights.size != count:
        raise InvalidArgumentError(f"{weights.size} weights for {count} models")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise InvalidArgumentError("aggregation weights must be finite and non-negative")
    if weights.sum() == 0:
        raise InvalidArgumentError("aggregation weights must not all be zero")

    return weights / weights.sum()

def _order_free_weighted_mean(stack: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """
    (Internal Helper) Weighted mean over axis 0 whose rounding does not depend on row order

    Terms are taken relative to the elementwise minimum and sorted before the
    sum, so any permutation of the rows gives the same bits, and identical rows
    give back that row exactly.

    Args:
        stack (np.array): (models x parameters) matrix
        weights (np.array): Normalized weight per row

    Returns:
        np.array: The weighted mean parameter vector
    """
    reference = stack.min(axis=0)
    terms = weights[:, None] * (stack - reference)

    return reference + np.sort(terms, axis=0).sum(axis=0)

def _minibatch_slices(size: int, batch_size: int, rng: np.random.Generator) -> list:
    """
    (Internal Helper) Shuffle row indices once and cut them into mini-batches
    """
    order = rng.permutation(size)

    return [order[start: start + batch_size] for start in range(0, size, batch_size)]
