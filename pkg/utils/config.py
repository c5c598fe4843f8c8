import json
from pathlib import Path
from typing import List, Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from utils.errors import ConfigError

class _StrictModel(BaseModel):
    """
    Base schema: frozen, and unknown keys are validation errors.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

class DatasetConfig(_StrictModel):
    source: Literal["gmm", "idx"] = "gmm"
    class_count: int = Field(10, ge=2)
    feature_dim: int = Field(20, ge=1)
    class_separation: float = Field(3.0, gt=0)
    feature_variance: float = Field(1.0, gt=0)
    train_samples: int = Field(6000, ge=1)
    test_samples: int = Field(2000, ge=1)
    train_images: Optional[str] = None
    train_labels: Optional[str] = None
    test_images: Optional[str] = None
    test_labels: Optional[str] = None
    max_samples: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _check_idx_paths(self):
        if self.source == "idx":
            for name in ("train_images", "train_labels", "test_images", "test_labels"):
                if getattr(self, name) is None:
                    raise ValueError(f"{name} is required when source is 'idx'")
        return self

class PartitionPlan(_StrictModel):
    alpha: float = Field(..., gt=0)
    regions: int = Field(3, ge=1)
    clients_per_region: int = Field(10, ge=1)
    server_fraction: float = Field(0.1, ge=0, lt=1)
    seed: Optional[int] = None

class ClientTrainingConfig(_StrictModel):
    epochs: int = Field(5, ge=0)
    lr: float = Field(0.05, gt=0)
    batch_size: int = Field(32, ge=1)
    clients_per_round: Optional[int] = Field(None, ge=1)
    weighting: Literal["uniform", "samples"] = "uniform"

class DistillConfig(_StrictModel):
    temperature: float = Field(3.0, gt=0)
    reliability_temperature: float = Field(10.0, ge=0)
    lambda1: Optional[float] = Field(None, ge=0)
    lambda2: Optional[float] = Field(None, ge=0)
    lambda3: Optional[float] = Field(None, ge=0)
    hard_loss_weight: float = Field(0.01, ge=0, le=1)
    epsilon: float = Field(0.05, ge=0)
    server_epochs: int = Field(10, ge=0)
    server_lr: float = Field(0.05, gt=0)
    server_batch_size: int = Field(64, ge=1)
    use_update_distillation: bool = True

class InjectionSpec(_StrictModel):
    round: int = Field(..., ge=1)
    clients: int = Field(10, ge=1)
    samples: int = Field(2000, ge=1)
    alpha: float = Field(0.1, gt=0)

    @model_validator(mode="after")
    def _check_samples(self):
        if self.samples < self.clients:
            raise ValueError("samples must be at least the number of clients")
        return self

class RunConfig(_StrictModel):
    dataset: DatasetConfig
    partition: PartitionPlan
    client: ClientTrainingConfig = ClientTrainingConfig()
    distill: DistillConfig = DistillConfig()
    rounds_per_episode: int = Field(..., ge=1)
    total_rounds: int = Field(..., ge=1)
    injections: List[InjectionSpec] = []
    global_aggregator: Literal["f2l", "fedavg"] = "f2l"
    hidden_width: int = Field(64, ge=0)
    seed: int = 0
    record_wall_clock: bool = False

    @model_validator(mode="after")
    def _check_rounds(self):
        if self.total_rounds < self.rounds_per_episode:
            raise ValueError("total_rounds must be at least rounds_per_episode")
        return self

def _format_validation_error(error: ValidationError) -> str:
    """
    (Internal Helper) Turn a pydantic error into one line per offending dotted field path
    """
    messages = []
    for item in error.errors():
        field = ".".join(str(part) for part in item["loc"]) or "<root>"
        messages.append(f"{field}: {item['msg']}")

    return "; ".join(messages)

def parse_run_config(payload: dict, seed_override: Optional[int] = None) -> RunConfig:
    """
    Validate a RunConfig document.

    Args:
        payload (dict): The decoded JSON document
        seed_override (int, optional): Replaces the root seed when given

    Returns:
        RunConfig: The validated configuration

    Raises:
        ConfigError: If a field is missing, unknown or out of range; the message names the field
    """
    if seed_override is not None:
        payload = {**payload, "seed": seed_override}

    try:
        return RunConfig.model_validate(payload)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e

def load_run_config(config_path: str, seed_override: Optional[int] = None) -> RunConfig:
    """
    Read and validate a RunConfig JSON file.

    Raises:
        ConfigError: If the file is not valid JSON or does not validate
        FileNotFoundError: If the file does not exist
    """
    with open(Path(config_path), "r") as f:
        try:
            payload = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{config_path}: invalid JSON ({e.msg} at line {e.lineno})") from e

    if not isinstance(payload, dict):
        raise ConfigError(f"{config_path}: the top level must be a JSON object")

    return parse_run_config(payload, seed_override)
