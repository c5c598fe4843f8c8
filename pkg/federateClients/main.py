import numpy as np

from utils.errors import InvalidArgumentError
from trainNetworks.model import ModelParams
from trainNetworks.main import grad_step, cross_entropy_gradient
from federateClients.state import ClientState, RegionState
from federateClients.helper import (
    _check_same_shapes,
    _normalized_weights,
    _order_free_weighted_mean,
    _minibatch_slices,
)

def local_train(client: ClientState, init: ModelParams, epochs: int, lr: float, batch_size: int, seed: int) -> ModelParams:
    """
    Client update: E epochs of shuffled mini-batch SGD on the client's shard.

    Args:
        client (ClientState): The client whose shard is trained on
        init (ModelParams): The starting parameters (the current regional model)
        epochs (int): Number of passes over the shard, E >= 0
        lr (float): Learning rate
        batch_size (int): Mini-batch size
        seed (int): Seed of the per-epoch shuffles

    Returns:
        ModelParams: The locally trained parameters

    Raises:
        InvalidArgumentError: If the shard is empty or E is negative
    """
    if epochs < 0:
        raise InvalidArgumentError(f"epochs must be non-negative, got {epochs}")
    if client.shard.size == 0:
        raise InvalidArgumentError(f"client {client.id} holds an empty shard")
    if batch_size < 1:
        raise InvalidArgumentError(f"batch_size must be positive, got {batch_size}")

    rng = np.random.default_rng(seed)
    features = client.shard.data.features
    labels = client.shard.data.labels

    model = init
    for _ in range(epochs):
        for rows in _minibatch_slices(client.shard.size, batch_size, rng):
            model = grad_step(model, features[rows], labels[rows], lr)

    return model

def fedavg(models: list, weights: list = None) -> ModelParams:
    """
    Weighted elementwise mean of parameter vectors (uniform 1/N by default).

    The result does not depend on the order of `models`, bit for bit.

    Raises:
        InvalidArgumentError: If shapes differ or the weights are all zero
    """
    models = list(models)
    _check_same_shapes(models)
    normalized = _normalized_weights(weights, len(models))
    stack = np.stack([model.values for model in models])

    return models[0].with_values(_order_free_weighted_mean(stack, normalized))

def sample_clients(region: RegionState, k: int, seed: int) -> list:
    """
    Draw k distinct client ids of a region uniformly without replacement.

    Returns:
        list: The sampled ids in ascending order

    Raises:
        InvalidArgumentError: If k exceeds the region's population
    """
    population = region.client_ids
    if not 0 <= k <= len(population):
        raise InvalidArgumentError(f"cannot sample {k} clients from a region of {len(population)}")

    rng = np.random.default_rng(seed)
    picked = rng.choice(len(population), size=k, replace=False)

    return sorted(population[i] for i in picked)

def weight_divergence(w_a: ModelParams, w_b: ModelParams) -> float:
    """
    Euclidean norm of the parameter difference ||w_a - w_b||.
    """
    _check_same_shapes([w_a, w_b])

    return float(np.linalg.norm(w_a.values - w_b.values))

def probability_distance(p_client: np.ndarray, p_global: np.ndarray) -> float:
    """
    L1 distance sum_c |p_client(c) - p_global(c)| between two class-frequency vectors.
    """
    p_client = np.asarray(p_client, dtype=np.float64).reshape(-1)
    p_global = np.asarray(p_global, dtype=np.float64).reshape(-1)
    if p_client.size != p_global.size:
        raise InvalidArgumentError(f"length mismatch: {p_client.size} vs {p_global.size}")

    return float(np.abs(p_client - p_global).sum())

def class_distribution(labels: np.ndarray, class_count: int) -> np.ndarray:
    """
    Empirical class frequencies of a label vector (all zeros for an empty vector).
    """
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=class_count).astype(np.float64)
    if counts.sum() == 0:
        return counts

    return counts / counts.sum()

def gradient_dissimilarity(clients: list, model: ModelParams) -> (float, float):
    """
    Heterogeneity of client gradients at a common model.

    A is the mean squared norm of the clients' full-shard gradients and B the
    squared norm of their mean; A >= B, with equality when all clients agree.

    Args:
        clients (list): ClientState objects, at least one
        model (ModelParams): The point at which gradients are evaluated

    Returns:
        tuple: (A, B)
    """
    if len(clients) == 0:
        raise InvalidArgumentError("at least one client is required")

    gradients = []
    for client in sorted(clients, key=lambda c: c.id):
        _, gradient = cross_entropy_gradient(model, client.shard.data.features, client.shard.data.labels)
        gradients.append(gradient)
    gradients = np.stack(gradients)

    mean_squared_norm = float(np.mean(np.sum(gradients ** 2, axis=1)))
    squared_norm_of_mean = float(np.sum(gradients.mean(axis=0) ** 2))

    return mean_squared_norm, squared_norm_of_mean
