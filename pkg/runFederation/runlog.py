import math
from dataclasses import dataclass, field, asdict

AGGREGATOR_LKD = "LKD"
AGGREGATOR_FEDAVG = "FedAvg"
AGGREGATOR_NONE = "none"

@dataclass(frozen=True)
class RoundRecord:
    """
    Metrics of one completed communication round.

    beta_spread is None when no reliability was computed that round; missing
    classes in per_class_accuracy are None as well.
    """
    round: int
    episode: int
    aggregator: str
    global_top1: float
    region_accuracies: list
    per_class_accuracy: list
    beta_spread: float = None
    probability_distance: float = None
    seconds_global_step: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "RoundRecord":
        return cls(**payload)

@dataclass
class RunLog:
    """
    One record per completed round, plus the final models kept in memory only.
    """
    records: list = field(default_factory=list)
    final_global: object = field(default=None, repr=False, compare=False)
    final_regions: list = field(default=None, repr=False, compare=False)
    last_reliability: object = field(default=None, repr=False, compare=False)

    def append(self, record: RoundRecord) -> None:
        expected = len(self.records) + 1
        if record.round != expected:
            raise ValueError(f"round {record.round} logged where round {expected} was expected")
        self.records.append(record)

    @property
    def rounds(self) -> list:
        return [record.round for record in self.records]

    @property
    def aggregators(self) -> list:
        """
        Tags of the rounds that ended an episode.
        """
        return [record.aggregator for record in self.records if record.aggregator != AGGREGATOR_NONE]

    def global_top1(self) -> list:
        return [record.global_top1 for record in self.records]

def nan_to_none(values) -> list:
    """
    Replace NaN entries by None so the list serialises as valid JSON.
    """
    return [None if value is None or (isinstance(value, float) and math.isnan(value)) else float(value) for value in values]
