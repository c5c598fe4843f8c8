import numpy as np
from dataclasses import dataclass

from utils.errors import InvalidArgumentError

@dataclass(frozen=True, eq=False)
class GaussianClassModel:
    """
    A model summarised by one Gaussian (mean, variance) of its output per class.
    """
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64).reshape(-1)
        variances = np.asarray(self.variances, dtype=np.float64).reshape(-1)
        if means.size != variances.size:
            raise InvalidArgumentError("one variance per class mean is required")
        if np.any(variances <= 0):
            raise InvalidArgumentError("variances must be positive")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)

    @property
    def class_count(self) -> int:
        return int(self.means.size)

@dataclass(frozen=True, eq=False)
class TeacherEnsemble:
    """
    R Gaussian teachers, their per-class accuracies tau[r, c] and the global class means.
    """
    teachers: tuple
    accuracies: np.ndarray
    global_means: np.ndarray

    def __post_init__(self):
        teachers = tuple(self.teachers)
        if len(teachers) == 0:
            raise InvalidArgumentError("an ensemble needs at least one teacher")
        class_count = teachers[0].class_count
        if any(teacher.class_count != class_count for teacher in teachers):
            raise InvalidArgumentError("all teachers must cover the same classes")

        accuracies = np.atleast_2d(np.asarray(self.accuracies, dtype=np.float64))
        global_means = np.asarray(self.global_means, dtype=np.float64).reshape(-1)
        if accuracies.shape != (len(teachers), class_count):
            raise InvalidArgumentError(f"accuracies must have shape {(len(teachers), class_count)}")
        if global_means.size != class_count:
            raise InvalidArgumentError("one global mean per class is required")

        object.__setattr__(self, "teachers", teachers)
        object.__setattr__(self, "accuracies", accuracies)
        object.__setattr__(self, "global_means", global_means)

    @property
    def region_count(self) -> int:
        return len(self.teachers)

    @property
    def class_count(self) -> int:
        return self.teachers[0].class_count

    def class_moments(self, c: int) -> (np.ndarray, np.ndarray):
        """
        (means, variances) of class c across teachers, in teacher order.
        """
        if not 0 <= c < self.class_count:
            raise InvalidArgumentError(f"class {c} out of range")
        return (
            np.array([teacher.means[c] for teacher in self.teachers]),
            np.array([teacher.variances[c] for teacher in self.teachers]),
        )

    def satisfies_ordering(self, c: int) -> bool:
        """
        True when variances and distances to the global mean both grow with the teacher index.
        """
        means, variances = self.class_moments(c)
        offsets = np.abs(means - self.global_means[c])
        return bool(np.all(np.diff(variances) >= 0) and np.all(np.diff(offsets) >= 0))
