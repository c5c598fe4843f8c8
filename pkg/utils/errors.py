class InvalidArgumentError(ValueError):
    """Raised when an operation receives arguments outside its contract."""


class InfeasiblePartitionError(ValueError):
    """Raised when a partition plan cannot give every client at least one sample."""


class IdxFormatError(ValueError):
    """Raised when an IDX file has a wrong magic number, a truncated payload or mismatched counts."""


class DegenerateClassError(ValueError):
    """Raised when a one-vs-rest AUC has no positives or no negatives."""


class ConfigError(ValueError):
    """Raised when an experiment configuration does not validate."""
