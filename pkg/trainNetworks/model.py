import numpy as np
from dataclasses import dataclass, field

from utils.errors import InvalidArgumentError

@dataclass(frozen=True, eq=False)
class ModelParams:
    """
    Flat parameter vector of a fully connected classifier plus its layer shapes.

    Layer i owns an (in x out) weight block followed by an (out,) bias block,
    laid out back to back in `values`. Hidden layers use ReLU and the last
    layer emits the C class logits. Instances are read-only.
    """
    layer_shapes: tuple
    values: np.ndarray
    seed: int = 0
    _views: list = field(default=None, init=False, repr=False)

    def __post_init__(self):
        shapes = tuple((int(n_in), int(n_out)) for n_in, n_out in self.layer_shapes)
        if len(shapes) == 0:
            raise InvalidArgumentError("a model needs at least one layer")
        for (_, prev_out), (next_in, _) in zip(shapes[:-1], shapes[1:]):
            if prev_out != next_in:
                raise InvalidArgumentError(f"layer shapes do not chain: {shapes}")

        values = np.array(self.values, dtype=np.float64).reshape(-1)
        expected = sum(n_in * n_out + n_out for n_in, n_out in shapes)
        if values.size != expected:
            raise InvalidArgumentError(f"expected {expected} parameters for {shapes}, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise InvalidArgumentError("model parameters must be finite")
        values.flags.writeable = False

        views = []
        offset = 0
        for n_in, n_out in shapes:
            weight = values[offset: offset + n_in * n_out].reshape(n_in, n_out)
            offset += n_in * n_out
            bias = values[offset: offset + n_out]
            offset += n_out
            views.append((weight, bias))

        object.__setattr__(self, "layer_shapes", shapes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_views", views)

    @property
    def input_dim(self) -> int:
        return self.layer_shapes[0][0]

    @property
    def class_count(self) -> int:
        return self.layer_shapes[-1][1]

    @property
    def layers(self) -> list:
        """
        Read-only (weight, bias) views, one pair per layer.
        """
        return self._views

    def with_values(self, values: np.ndarray) -> "ModelParams":
        """
        A model with the same shapes and seed but new parameter values.
        """
        return ModelParams(self.layer_shapes, values, self.seed)

    def same_shape(self, other: "ModelParams") -> bool:
        return self.layer_shapes == other.layer_shapes

def model_from_layers(layers: list, seed: int = 0) -> ModelParams:
    """
    Build a ModelParams from explicit (weight, bias) pairs.

    Args:
        layers (list): A list of (weight (in x out), bias (out,)) pairs
        seed (int): Seed recorded on the model

    Returns:
        ModelParams: The flattened model
    """
    shapes = []
    chunks = []
    for weight, bias in layers:
        weight = np.asarray(weight, dtype=np.float64)
        bias = np.asarray(bias, dtype=np.float64).reshape(-1)
        if weight.ndim != 2 or bias.size != weight.shape[1]:
            raise InvalidArgumentError("each layer needs a 2-D weight and a matching bias")
        shapes.append(weight.shape)
        chunks.extend([weight.reshape(-1), bias])

    return ModelParams(tuple(shapes), np.concatenate(chunks), seed)

def init_model(input_dim: int, hidden_width: int, class_count: int, seed: int) -> ModelParams:
    """
    Initialise an input -> hidden (ReLU) -> C-way linear classifier.

    Weights are drawn uniformly in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.

    Args:
        input_dim (int): Number of input features
        hidden_width (int): Width of the hidden layer; 0 builds a single linear layer
        class_count (int): Number of classes C
        seed (int): Seed of the initialisation

    Returns:
        ModelParams: The initial model
    """
    if input_dim < 1 or class_count < 1 or hidden_width < 0:
        raise InvalidArgumentError("input_dim and class_count must be positive, hidden_width non-negative")

    rng = np.random.default_rng(seed)
    if hidden_width == 0:
        shapes = [(input_dim, class_count)]
    else:
        shapes = [(input_dim, hidden_width), (hidden_width, class_count)]

    chunks = []
    for fan_in, fan_out in shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-limit, limit, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))

    return ModelParams(tuple(shapes), np.concatenate(chunks), seed)
