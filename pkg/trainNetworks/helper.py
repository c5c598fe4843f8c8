import numpy as np

from utils.errors import InvalidArgumentError

PROBABILITY_FLOOR = 1e-12

def _as_batch(model, batch) -> np.ndarray:
    """
    (Internal Helper) Validate a feature batch against the model's first layer

    Args:
        model (ModelParams): The model the batch will be fed to
        batch (np.array): A (rows x features) matrix, or a single feature row

    Returns:
        np.array: The batch as a 2-D float64 matrix
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch.reshape(1, -1)
    if batch.ndim != 2:
        raise InvalidArgumentError(f"batch must be 2-D, got shape {batch.shape}")
    if batch.shape[1] != model.input_dim:
        raise InvalidArgumentError(f"batch has {batch.shape[1]} columns, model expects {model.input_dim}")
    if not np.all(np.isfinite(batch)):
        raise InvalidArgumentError("batch contains non-finite values")

    return batch

def _as_labels(labels, rows: int, class_count: int) -> np.ndarray:
    """
    (Internal Helper) Validate an integer label vector
    """
    labels = np.asarray(labels).reshape(-1)
    if labels.size != rows:
        raise InvalidArgumentError(f"{labels.size} labels for {rows} rows")
    if labels.size and (labels.min() < 0 or labels.max() >= class_count):
        raise InvalidArgumentError(f"labels must lie in [0, {class_count})")

    return labels.astype(np.int64)

def _forward_with_cache(model, batch: np.ndarray) -> (np.ndarray, list):
    """
    (Internal Helper) Run the forward pass and keep every layer input for backprop

    Returns:
        tuple: (logits, layer_inputs) where layer_inputs[i] is what layer i received
    """
    layer_inputs = []
    activation = batch
    last = len(model.layers) - 1
    for index, (weight, bias) in enumerate(model.layers):
        layer_inputs.append(activation)
        activation = activation @ weight + bias
        if index < last:
            activation = np.maximum(activation, 0.0)

    return activation, layer_inputs

def _backward(model, layer_inputs: list, dlogits: np.ndarray) -> np.ndarray:
    """
    (Internal Helper) Backpropagate a logits gradient into a flat parameter gradient

    Args:
        model (ModelParams): The model whose forward pass produced layer_inputs
        layer_inputs (list): The per-layer inputs returned by _forward_with_cache
        dlogits (np.array): d(loss)/d(logits), same shape as the logits

    Returns:
        np.array: Gradient laid out exactly like model.values
    """
    grads = [None] * len(model.layers)
    upstream = dlogits
    for index in range(len(model.layers) - 1, -1, -1):
        weight, _ = model.layers[index]
        layer_input = layer_inputs[index]
        grads[index] = (layer_input.T @ upstream, upstream.sum(axis=0))
        if index > 0:
            upstream = (upstream @ weight.T) * (layer_input > 0.0)

    return np.concatenate([np.concatenate([gw.reshape(-1), gb]) for gw, gb in grads])
