import numpy as np
import pandas as pd
from pathlib import Path
from scipy.special import softmax
from sklearn.metrics import roc_auc_score

from utils.errors import InvalidArgumentError, DegenerateClassError
from utils.pipeline import atomic_write_csv
from generateData.dataset import Dataset
from trainNetworks.model import ModelParams
from trainNetworks.main import predict, predict_proba
from federateClients.main import fedavg
from distillKnowledge.structures import AlignedPool, ReliabilityMatrix
from distillKnowledge.losses import teacher_loss, update_loss, hard_loss, resolve_lambdas
from distillKnowledge.helper import _class_aucs, _soft_targets, _joint_objective

def align_samples(model: ModelParams, pool: Dataset, source: str = "") -> AlignedPool:
    """
    Bucket every pool sample by the model's arg-max prediction (its pseudo-label).

    Args:
        model (ModelParams): The model whose predictions define the buckets
        pool (Dataset): The server pool
        source (str): Name of the model, kept for reports

    Returns:
        AlignedPool: C disjoint buckets whose sizes sum to the pool size
    """
    if pool.size == 0:
        raise InvalidArgumentError("cannot align an empty pool")

    predicted = predict(model, pool.features)
    buckets = tuple(np.flatnonzero(predicted == c) for c in range(pool.class_count))

    return AlignedPool(buckets, pool, source)

def auc_ovr(scores: np.ndarray, positives: np.ndarray) -> float:
    """
    One-vs-rest ROC AUC: the share of (positive, negative) pairs ranked correctly, ties counting half.

    Raises:
        DegenerateClassError: If there is no positive or no negative sample
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    positives = np.asarray(positives, dtype=bool).reshape(-1)
    if scores.size != positives.size:
        raise InvalidArgumentError(f"{scores.size} scores for {positives.size} flags")

    positive_count = int(positives.sum())
    if positive_count == 0 or positive_count == positives.size:
        raise DegenerateClassError("AUC needs at least one positive and one negative sample")

    return float(roc_auc_score(positives, scores))

def model_class_aucs(model: ModelParams, valset: Dataset) -> np.ndarray:
    """
    Per-class one-vs-rest AUC of a model, scored on its class probabilities (0.5 for degenerate classes).
    """
    if valset.size == 0:
        raise InvalidArgumentError("the validation set is empty")

    return _class_aucs(predict_proba(model, valset.features), valset.labels, auc_ovr)

def reliability_weights(aucs: np.ndarray, reliability_temperature: float) -> np.ndarray:
    """
    Softmax over models (axis 0) of AUC times T_w, computed per class column.

    Args:
        aucs (np.array): (models x C) one-vs-rest AUCs
        reliability_temperature (float): T_w >= 0

    Returns:
        np.array: Weights of the same shape, each column summing to one
    """
    if reliability_temperature < 0:
        raise InvalidArgumentError(f"reliability temperature must be non-negative, got {reliability_temperature}")

    return softmax(np.atleast_2d(np.asarray(aucs, dtype=np.float64)) * reliability_temperature, axis=0)

def class_reliability(models: list, valset: Dataset, reliability_temperature: float) -> ReliabilityMatrix:
    """
    Class reliability of every teacher: a softmax over teachers of AUC times T_w, class by class.

    Args:
        models (list): The regional teachers, in region order
        valset (Dataset): Labeled validation data
        reliability_temperature (float): T_w >= 0; 0 gives uniform weights

    Returns:
        ReliabilityMatrix: beta with one row per teacher and one column per class
    """
    if len(models) == 0:
        raise InvalidArgumentError("at least one teacher is required")
    if reliability_temperature < 0:
        raise InvalidArgumentError(f"reliability temperature must be non-negative, got {reliability_temperature}")

    aucs = np.stack([model_class_aucs(model, valset) for model in models])

    return ReliabilityMatrix(reliability_weights(aucs, reliability_temperature), reliability_temperature)

def old_model_reliability(old: ModelParams, new: ModelParams, valset: Dataset, reliability_temperature: float) -> np.ndarray:
    """
    Per-class weight of the previous global model against the current one.

    Returns:
        np.array: exp(AUC_old T_w) / (exp(AUC_new T_w) + exp(AUC_old T_w)) per class
    """
    if reliability_temperature < 0:
        raise InvalidArgumentError(f"reliability temperature must be non-negative, got {reliability_temperature}")

    aucs = np.stack([model_class_aucs(new, valset), model_class_aucs(old, valset)])

    return reliability_weights(aucs, reliability_temperature)[1]

def joint_loss(teachers: list, student: ModelParams, old_global: ModelParams, pool: Dataset, rel: ReliabilityMatrix, cfg, lambdas: tuple = None) -> float:
    """
    The full server objective on the pool.

    lambda1 * sum_r teacher_loss_r + lambda2 * update_loss + lambda3 * hard cross-entropy,
    with alignments taken from each teacher and, for the update term, from the student.

    Args:
        teachers (list): Regional models, in region order
        student (ModelParams): The global student
        old_global (ModelParams or None): The previous global model; None drops the update term
        pool (Dataset): Labeled server pool
        rel (ReliabilityMatrix): Teacher weights; beta_old is required when the update term is active
        cfg (DistillConfig): Temperatures and coefficients
        lambdas (tuple, optional): Explicit (lambda1, lambda2, lambda3)

    Returns:
        float: The loss
    """
    lambda1, lambda2, lambda3 = lambdas if lambdas is not None else resolve_lambdas(cfg, len(teachers))
    if rel.region_count != len(teachers):
        raise InvalidArgumentError(f"reliability has {rel.region_count} rows for {len(teachers)} teachers")

    total = 0.0
    if lambda1 != 0:
        for r, teacher in enumerate(teachers):
            aligned = align_samples(teacher, pool, f"region_{r}")
            total += lambda1 * teacher_loss(teacher, student, aligned, rel.beta[r], cfg.temperature)

    if lambda2 != 0 and old_global is not None:
        if rel.beta_old is None:
            raise InvalidArgumentError("the update term needs beta_old")
        aligned_g = align_samples(student, pool, "global")
        total += lambda2 * update_loss(old_global, student, aligned_g, rel.beta_old, cfg.temperature)

    if lambda3 != 0:
        total += lambda3 * hard_loss(student, pool)

    return total

def _epoch_targets(teachers: list, student: ModelParams, old_global: ModelParams, pool: Dataset, rel: ReliabilityMatrix, lambdas: tuple, temperature: float) -> list:
    """
    (Internal Helper) Soft targets of one epoch, frozen while the student trains on them
    """
    lambda1, lambda2, _ = lambdas
    targets = []
    for r, teacher in enumerate(teachers):
        aligned = align_samples(teacher, pool, f"region_{r}")
        probs, row_weights = _soft_targets(teacher, pool.features, aligned, rel.beta[r], temperature)
        targets.append((lambda1, probs, row_weights))

    if lambda2 != 0 and old_global is not None and rel.beta_old is not None:
        aligned_g = align_samples(student, pool, "global")
        probs, row_weights = _soft_targets(old_global, pool.features, aligned_g, rel.beta_old, temperature)
        targets.append((lambda2, probs, row_weights))

    return targets

def joint_loss_gradient(teachers: list, student: ModelParams, old_global: ModelParams, pool: Dataset, rel: ReliabilityMatrix, cfg, lambdas: tuple = None) -> (float, np.ndarray):
    """
    joint_loss over the full pool together with its gradient in the student's parameters.

    Alignments and reliabilities are constants; no gradient flows through them.
    """
    lambdas = lambdas if lambdas is not None else resolve_lambdas(cfg, len(teachers))
    targets = _epoch_targets(teachers, student, old_global, pool, rel, lambdas, cfg.temperature)

    return _joint_objective(student, pool.features, pool.labels, targets, lambdas, cfg.temperature)

def distill_trace(teachers: list, student_init: ModelParams, old_global: ModelParams, pool: Dataset, valset: Dataset, cfg, seed: int = 0, lambdas: tuple = None) -> (ModelParams, list):
    """
    Train the global student by label-driven multi-teacher distillation and keep the loss history.

    Every epoch first re-scores the teachers (and the old global model against the
    current student) on the validation set and re-aligns the pool, then runs
    shuffled mini-batch gradient descent on the joint loss.

    Args:
        teachers (list): Regional models, in region order
        student_init (ModelParams): Starting student
        old_global (ModelParams or None): Previous global model for the update term
        pool (Dataset): Labeled server pool
        valset (Dataset): Labeled data for the reliability scores
        cfg (DistillConfig): Distillation settings
        seed (int): Seed of the mini-batch shuffles
        lambdas (tuple, optional): Explicit (lambda1, lambda2, lambda3)

    Returns:
        tuple: (student, history) with one {'epoch', 'joint_loss', 'beta_spread'} dict per epoch
    """
    if len(teachers) == 0:
        raise InvalidArgumentError("at least one teacher is required")
    if pool.size == 0 or valset.size == 0:
        raise InvalidArgumentError("pool and validation set must not be empty")

    lambdas = lambdas if lambdas is not None else resolve_lambdas(cfg, len(teachers))
    use_update = lambdas[1] != 0 and old_global is not None
    rng = np.random.default_rng(seed)

    student = student_init
    history = []
    for epoch in range(cfg.server_epochs):
        rel = class_reliability(teachers, valset, cfg.reliability_temperature)
        if use_update:
            rel = rel.with_old(old_model_reliability(old_global, student, valset, cfg.reliability_temperature))
        targets = _epoch_targets(teachers, student, old_global if use_update else None, pool, rel, lambdas, cfg.temperature)

        batch_losses = []
        order = rng.permutation(pool.size)
        for start in range(0, pool.size, cfg.server_batch_size):
            rows = order[start: start + cfg.server_batch_size]
            batch_targets = [(coefficient, probs[rows], weights[rows]) for coefficient, probs, weights in targets]
            loss, gradient = _joint_objective(student, pool.features[rows], pool.labels[rows], batch_targets, lambdas, cfg.temperature)
            student = student.with_values(student.values - cfg.server_lr * gradient)
            batch_losses.append(loss)

        history.append({
            "epoch": epoch,
            "joint_loss": float(np.mean(batch_losses)),
            "beta_spread": float(np.max(rel.beta.max(axis=0) - rel.beta.min(axis=0))),
        })

    return student, history

def distill(teachers: list, student_init: ModelParams, old_global: ModelParams, pool: Dataset, valset: Dataset, cfg, seed: int = 0, lambdas: tuple = None) -> ModelParams:
    """
    distill_trace without the history.
    """
    student, _ = distill_trace(teachers, student_init, old_global, pool, valset, cfg, seed, lambdas)

    return student

def default_student(teachers: list) -> ModelParams:
    """
    Starting point of the student: the uniform average of the teachers.
    """
    return fedavg(teachers)

def export_reliability_csv(rel: ReliabilityMatrix, path: str, region_ids: list = None) -> Path:
    """
    Write beta (one row per region) and beta_old (row 'old', when present) as CSV.

    Columns: model, class_0 .. class_{C-1}.
    """
    region_ids = region_ids if region_ids is not None else list(range(rel.region_count))
    columns = [f"class_{c}" for c in range(rel.class_count)]

    table = pd.DataFrame(rel.beta, columns=columns)
    table.insert(0, "model", [str(region_id) for region_id in region_ids])
    if rel.beta_old is not None:
        old_row = pd.DataFrame([rel.beta_old], columns=columns)
        old_row.insert(0, "model", "old")
        table = pd.concat([table, old_row], ignore_index=True)

    return atomic_write_csv(table, Path(path))
