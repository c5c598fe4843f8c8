import numpy as np
from scipy.special import softmax, rel_entr

from utils.errors import InvalidArgumentError
from trainNetworks.model import ModelParams
from trainNetworks.helper import (
    PROBABILITY_FLOOR,
    _as_batch,
    _as_labels,
    _forward_with_cache,
    _backward,
)

def temp_softmax(logits: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """
    Temperature softmax exp(z_l / T) / sum_j exp(z_j / T), row-wise on the last axis.

    scipy's softmax subtracts the row maximum before exponentiating.

    Args:
        logits (np.array): A logit vector of length C, or a (rows x C) matrix
        temperature (float): The temperature T > 0; larger values flatten the output

    Returns:
        np.array: Probabilities with the same shape as logits

    Raises:
        InvalidArgumentError: If T <= 0 or a logit is not finite
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not temperature > 0 or not np.isfinite(temperature):
        raise InvalidArgumentError(f"temperature must be positive and finite, got {temperature}")
    if not np.all(np.isfinite(logits)):
        raise InvalidArgumentError("logits must be finite")

    return softmax(logits / temperature, axis=-1)

def kl_divergence(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """
    Discrete KL divergence sum_l p_l (ln p_l - ln q_l), with 0 * ln 0 = 0.

    q is floored at 1e-12 before the log. Matrices are reduced row-wise.

    Raises:
        InvalidArgumentError: If p and q differ in shape
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise InvalidArgumentError(f"shape mismatch: {p.shape} vs {q.shape}")

    divergence = rel_entr(p, np.maximum(q, PROBABILITY_FLOOR)).sum(axis=-1)
    if divergence.ndim == 0:
        return float(divergence)

    return divergence

def cross_entropy(probs: np.ndarray, label: int) -> float:
    """
    Negative log-likelihood -ln(max(probs[label], 1e-12)) of one sample.

    Raises:
        InvalidArgumentError: If label is outside [0, C)
    """
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    if not 0 <= int(label) < probs.size:
        raise InvalidArgumentError(f"label {label} out of range for {probs.size} classes")

    return float(-np.log(max(probs[int(label)], PROBABILITY_FLOOR)))

def mean_cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """
    Mean negative log-likelihood over the rows of a probability matrix.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = _as_labels(labels, probs.shape[0], probs.shape[1])
    if labels.size == 0:
        raise InvalidArgumentError("cannot average cross-entropy over an empty batch")
    picked = probs[np.arange(labels.size), labels]

    return float(np.mean(-np.log(np.maximum(picked, PROBABILITY_FLOOR))))

def forward(model: ModelParams, batch: np.ndarray) -> np.ndarray:
    """
    Logits of a batch: ReLU between layers, linear output of width C.

    Args:
        model (ModelParams): The classifier
        batch (np.array): A (rows x input_dim) feature matrix

    Returns:
        np.array: A (rows x C) logit matrix

    Raises:
        InvalidArgumentError: If the batch width differs from the model's input dimension
    """
    logits, _ = _forward_with_cache(model, _as_batch(model, batch))

    return logits

def predict_proba(model: ModelParams, batch: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    """
    Temperature-softmax probabilities of a batch.
    """
    return temp_softmax(forward(model, batch), temperature)

def predict(model: ModelParams, batch: np.ndarray) -> np.ndarray:
    """
    Arg-max class of every row; ties go to the lowest class index.
    """
    return np.argmax(forward(model, batch), axis=1)

def backward(model: ModelParams, batch: np.ndarray, dlogits: np.ndarray) -> np.ndarray:
    """
    Flat parameter gradient for an arbitrary d(loss)/d(logits).

    Args:
        model (ModelParams): The classifier
        batch (np.array): The batch the logits were computed on
        dlogits (np.array): A (rows x C) gradient with respect to the logits

    Returns:
        np.array: The gradient, laid out like model.values
    """
    batch = _as_batch(model, batch)
    dlogits = np.asarray(dlogits, dtype=np.float64)
    if dlogits.shape != (batch.shape[0], model.class_count):
        raise InvalidArgumentError(f"dlogits must have shape {(batch.shape[0], model.class_count)}")
    _, layer_inputs = _forward_with_cache(model, batch)

    return _backward(model, layer_inputs, dlogits)

def cross_entropy_gradient(model: ModelParams, batch: np.ndarray, labels: np.ndarray, temperature: float = 1.0) -> (float, np.ndarray):
    """
    Mean temperature-softmax cross-entropy of a batch and its parameter gradient.

    Returns:
        tuple: (loss, flat gradient)

    Raises:
        InvalidArgumentError: If the batch is empty or labels are out of range
    """
    batch = _as_batch(model, batch)
    if batch.shape[0] == 0:
        raise InvalidArgumentError("batch must not be empty")
    labels = _as_labels(labels, batch.shape[0], model.class_count)

    logits, layer_inputs = _forward_with_cache(model, batch)
    probs = temp_softmax(logits, temperature)
    loss = mean_cross_entropy(probs, labels)

    dlogits = probs.copy()
    dlogits[np.arange(labels.size), labels] -= 1.0
    dlogits /= temperature * labels.size

    return loss, _backward(model, layer_inputs, dlogits)

def grad_step(model: ModelParams, batch: np.ndarray, labels: np.ndarray, lr: float, temperature: float = 1.0) -> ModelParams:
    """
    One plain SGD step on the mean temperature-softmax cross-entropy.

    Args:
        model (ModelParams): Current parameters
        batch (np.array): A non-empty (rows x input_dim) feature matrix
        labels (np.array): Class index of every row
        lr (float): Learning rate; 0 leaves the parameters untouched
        temperature (float): Softmax temperature of the loss

    Returns:
        ModelParams: The updated parameters
    """
    if not lr >= 0:
        raise InvalidArgumentError(f"learning rate must be non-negative, got {lr}")

    _, gradient = cross_entropy_gradient(model, batch, labels, temperature)

    return model.with_values(model.values - lr * gradient)
