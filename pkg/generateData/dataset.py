import numpy as np
from dataclasses import dataclass, field

from utils.errors import InvalidArgumentError

@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Feature matrix with integer class labels in [0, class_count).
    """
    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        if features.ndim == 1:
            features = features.reshape(-1, 1) if features.size else features.reshape(0, 0)
        labels = np.array(self.labels).reshape(-1).astype(np.int64)

        if features.ndim != 2:
            raise InvalidArgumentError(f"features must be 2-D, got shape {features.shape}")
        if labels.size != features.shape[0]:
            raise InvalidArgumentError(f"{labels.size} labels for {features.shape[0]} feature rows")
        if self.class_count < 1:
            raise InvalidArgumentError("class_count must be positive")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise InvalidArgumentError(f"labels must lie in [0, {self.class_count})")
        if not np.all(np.isfinite(features)):
            raise InvalidArgumentError("features must be finite")

        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_count", int(self.class_count))

    @property
    def size(self) -> int:
        return int(self.labels.size)

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    def subset(self, indices: np.ndarray) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[indices], self.labels[indices], self.class_count)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.class_count)

@dataclass(frozen=True, eq=False)
class Shard:
    """
    A client's or the server's slice of a parent dataset, kept as sorted row indices.
    """
    indices: np.ndarray
    data: Dataset = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def class_counts(self) -> np.ndarray:
        return self.data.class_counts()

@dataclass(frozen=True, eq=False)
class GmmSpec:
    """
    Gaussian mixture with per-class means, diagonal variances and mixture weights.
    """
    means: np.ndarray
    variances: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        variances = np.atleast_2d(np.asarray(self.variances, dtype=np.float64))
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)

        if variances.shape != means.shape:
            raise InvalidArgumentError("variances must have the same shape as means")
        if weights.size != means.shape[0]:
            raise InvalidArgumentError("one mixture weight per class is required")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise InvalidArgumentError("mixture weights must be non-negative and sum to 1")
        if np.any(variances <= 0) or not np.all(np.isfinite(variances)) or not np.all(np.isfinite(means)):
            raise InvalidArgumentError("variances must be positive and all moments finite")

        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "weights", weights)

    @property
    def class_count(self) -> int:
        return int(self.means.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.means.shape[1])
