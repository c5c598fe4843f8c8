import numpy as np
from dataclasses import dataclass, field

from utils.errors import InvalidArgumentError
from generateData.dataset import Dataset

@dataclass(frozen=True, eq=False)
class AlignedPool:
    """
    The server pool bucketed by one model's predicted class.

    buckets[c] holds the (sorted) pool rows the source model predicts as class c;
    the buckets are disjoint and cover every row of the pool.
    """
    buckets: tuple
    pool: Dataset = field(repr=False)
    source: str = ""

    def __post_init__(self):
        buckets = tuple(np.asarray(bucket, dtype=np.int64) for bucket in self.buckets)
        if sum(bucket.size for bucket in buckets) != self.pool.size:
            raise InvalidArgumentError("aligned buckets must cover the pool exactly once")
        object.__setattr__(self, "buckets", buckets)

    @property
    def class_count(self) -> int:
        return len(self.buckets)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([bucket.size for bucket in self.buckets], dtype=np.int64)

    def assignments(self) -> np.ndarray:
        """
        Bucket of every pool row, as one label vector of length S.
        """
        assigned = np.empty(self.pool.size, dtype=np.int64)
        for c, bucket in enumerate(self.buckets):
            assigned[bucket] = c
        return assigned

@dataclass(frozen=True, eq=False)
class ReliabilityMatrix:
    """
    Per-region, per-class reliability weights plus the old global model's weights.

    beta[r, c] is teacher r's share for class c (columns sum to one); beta_old[c]
    is the previous global model's weight against the current one, or None when
    it has not been scored.
    """
    beta: np.ndarray
    temperature: float
    beta_old: np.ndarray = None

    def __post_init__(self):
        beta = np.atleast_2d(np.asarray(self.beta, dtype=np.float64))
        if not np.allclose(beta.sum(axis=0), 1.0, atol=1e-9):
            raise InvalidArgumentError("every class column of beta must sum to one")
        object.__setattr__(self, "beta", beta)

        if self.beta_old is not None:
            beta_old = np.asarray(self.beta_old, dtype=np.float64).reshape(-1)
            if beta_old.size != beta.shape[1]:
                raise InvalidArgumentError("beta_old needs one weight per class")
            object.__setattr__(self, "beta_old", beta_old)

    @property
    def region_count(self) -> int:
        return int(self.beta.shape[0])

    @property
    def class_count(self) -> int:
        return int(self.beta.shape[1])

    def with_old(self, beta_old: np.ndarray) -> "ReliabilityMatrix":
        return ReliabilityMatrix(self.beta, self.temperature, beta_old)
