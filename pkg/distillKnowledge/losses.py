import numpy as np

from utils.errors import InvalidArgumentError
from trainNetworks.model import ModelParams
from trainNetworks.main import predict_proba, mean_cross_entropy
from distillKnowledge.structures import AlignedPool
from distillKnowledge.helper import _bucket_weighted_kl

LAMBDA_TOLERANCE = 1e-12

def surrogate_prob(probs: np.ndarray, c: int) -> np.ndarray:
    """
    Class-conditioned teacher output: probs when its arg-max is c, else all zeros.

    Ties in the arg-max go to the lowest class index.

    Raises:
        InvalidArgumentError: If c is outside [0, C)
    """
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    if not 0 <= int(c) < probs.size:
        raise InvalidArgumentError(f"class {c} out of range for {probs.size} classes")

    if int(np.argmax(probs)) == int(c):
        return probs.copy()

    return np.zeros_like(probs)

def teacher_loss(teacher: ModelParams, student: ModelParams, aligned: AlignedPool, beta_row: np.ndarray, temperature: float) -> float:
    """
    Label-driven distillation loss of one regional teacher.

    For every bucket c of the teacher's alignment, the KL divergence from the
    teacher's tempered output to the student's is summed over the bucket and
    weighted by the teacher's reliability for c. The total is divided by the
    pool size S.

    Args:
        teacher (ModelParams): The regional model the buckets were built from
        student (ModelParams): The global student
        aligned (AlignedPool): align_samples(teacher, pool)
        beta_row (np.array): The teacher's reliability per class
        temperature (float): Soft temperature T

    Returns:
        float: The non-negative loss

    Raises:
        InvalidArgumentError: If the pool is empty
    """
    if aligned.pool.size == 0:
        raise InvalidArgumentError("the aligned pool is empty")

    features = aligned.pool.features
    # rows of bucket c have teacher arg-max c, so the class-conditioned output is the raw output
    teacher_probs = predict_proba(teacher, features, temperature)
    student_probs = predict_proba(student, features, temperature)

    return _bucket_weighted_kl(teacher_probs, student_probs, aligned, beta_row)

def update_loss(old: ModelParams, new: ModelParams, aligned_g: AlignedPool, beta_old: np.ndarray, temperature: float) -> float:
    """
    Retention loss keeping the new global model close to the previous one.

    Same shape as teacher_loss, with the old global model as the source and the
    buckets taken from the current global model's alignment.
    """
    if aligned_g.pool.size == 0:
        raise InvalidArgumentError("the aligned pool is empty")

    features = aligned_g.pool.features
    old_probs = predict_proba(old, features, temperature)
    new_probs = predict_proba(new, features, temperature)

    return _bucket_weighted_kl(old_probs, new_probs, aligned_g, beta_old)

def lambda_schedule(region_count: int, lambda1: float, use_update: bool) -> (float, float):
    """
    Derive (lambda2, lambda3) from lambda1 so that the three coefficients sum to one.

    With update distillation lambda2 = lambda1 / R and lambda3 = 1 - (R + 1) lambda1 / R;
    without it lambda2 = 0 and lambda3 = 1 - lambda1.

    Raises:
        InvalidArgumentError: If lambda1 is outside [0, R / (R + 1)] (or [0, 1] without update)
    """
    if region_count < 1:
        raise InvalidArgumentError(f"region count must be positive, got {region_count}")

    upper = region_count / (region_count + 1) if use_update else 1.0
    if not -LAMBDA_TOLERANCE <= lambda1 <= upper + LAMBDA_TOLERANCE:
        raise InvalidArgumentError(f"lambda1 = {lambda1} is outside [0, {upper:.6g}]")

    if use_update:
        lambda2 = lambda1 / region_count
        return lambda2, 1.0 - lambda1 - lambda2

    return 0.0, 1.0 - lambda1

def lambda1_for_hard_weight(region_count: int, lambda3: float, use_update: bool) -> float:
    """
    Inverse of lambda_schedule: the lambda1 that leaves exactly lambda3 for the hard loss.
    """
    if not 0 <= lambda3 <= 1:
        raise InvalidArgumentError(f"hard-loss weight must lie in [0, 1], got {lambda3}")

    if use_update:
        return region_count * (1.0 - lambda3) / (region_count + 1)

    return 1.0 - lambda3

def resolve_lambdas(config, region_count: int) -> (float, float, float):
    """
    The (lambda1, lambda2, lambda3) a distillation run uses.

    Explicit coefficients in the config win; missing ones follow the schedule,
    starting from the lambda1 that leaves `hard_loss_weight` for the hard loss.

    Args:
        config (DistillConfig): The distillation settings
        region_count (int): Number of teachers R

    Returns:
        tuple: (lambda1, lambda2, lambda3)
    """
    lambda1 = config.lambda1
    if lambda1 is None:
        lambda1 = lambda1_for_hard_weight(region_count, config.hard_loss_weight, config.use_update_distillation)

    if config.lambda2 is not None and config.lambda3 is not None:
        lambda2, lambda3 = config.lambda2, config.lambda3
    else:
        lambda2, lambda3 = lambda_schedule(region_count, lambda1, config.use_update_distillation)
        lambda2 = config.lambda2 if config.lambda2 is not None else lambda2
        lambda3 = config.lambda3 if config.lambda3 is not None else lambda3

    if not config.use_update_distillation:
        lambda2 = 0.0

    return float(lambda1), float(lambda2), float(lambda3)

def hard_loss(student: ModelParams, pool) -> float:
    """
    Mean cross-entropy of the student on the labeled pool at T = 1.
    """
    if pool.size == 0:
        raise InvalidArgumentError("the pool is empty")

    return mean_cross_entropy(predict_proba(student, pool.features, 1.0), pool.labels)
