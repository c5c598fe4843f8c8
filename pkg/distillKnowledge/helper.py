import numpy as np

from utils.errors import InvalidArgumentError, DegenerateClassError
from trainNetworks.main import temp_softmax, kl_divergence
from trainNetworks.helper import _forward_with_cache, _backward

NEUTRAL_AUC = 0.5

def _bucket_weighted_kl(source_probs: np.ndarray, target_probs: np.ndarray, aligned, class_weights: np.ndarray) -> float:
    """
    (Internal Helper) sum_c w_c * sum_{i in bucket c} KL(source_i || target_i), divided by the pool size

    Args:
        source_probs (np.array): (S x C) probabilities of the model the buckets came from
        target_probs (np.array): (S x C) probabilities of the model being pulled towards it
        aligned (AlignedPool): The buckets
        class_weights (np.array): One weight per bucket

    Returns:
        float: The normalized weighted divergence
    """
    if aligned.pool.size == 0:
        raise InvalidArgumentError("the aligned pool is empty")
    class_weights = np.asarray(class_weights, dtype=np.float64).reshape(-1)
    if class_weights.size != aligned.class_count:
        raise InvalidArgumentError(f"{class_weights.size} class weights for {aligned.class_count} buckets")

    total = 0.0
    for c, bucket in enumerate(aligned.buckets):
        if bucket.size == 0 or class_weights[c] == 0:
            continue
        total += class_weights[c] * float(np.sum(kl_divergence(source_probs[bucket], target_probs[bucket])))

    return total / aligned.pool.size

def _class_aucs(probs: np.ndarray, labels: np.ndarray, auc_fn) -> np.ndarray:
    """
    (Internal Helper) One-vs-rest AUC of every class, 0.5 where a class is degenerate

    Args:
        probs (np.array): (n x C) class probabilities used as scores
        labels (np.array): True classes
        auc_fn (callable): auc_ovr

    Returns:
        np.array: One AUC per class
    """
    aucs = np.empty(probs.shape[1])
    for c in range(probs.shape[1]):
        try:
            aucs[c] = auc_fn(probs[:, c], labels == c)
        except DegenerateClassError:
            aucs[c] = NEUTRAL_AUC

    return aucs

def _soft_targets(model, features: np.ndarray, aligned, class_weights: np.ndarray, temperature: float) -> (np.ndarray, np.ndarray):
    """
    (Internal Helper) A distillation target: the model's tempered probabilities and per-row weights

    Row i is weighted by the weight of the bucket it was aligned to.

    Returns:
        tuple: ((S x C) probabilities, (S,) row weights)
    """
    logits, _ = _forward_with_cache(model, features)
    probs = temp_softmax(logits, temperature)
    row_weights = np.asarray(class_weights, dtype=np.float64)[aligned.assignments()]

    return probs, row_weights

def _joint_objective(student, features: np.ndarray, labels: np.ndarray, targets: list, lambdas: tuple, temperature: float) -> (float, np.ndarray):
    """
    (Internal Helper) Joint loss of a batch and its gradient with respect to the student

    The soft part is sum over targets of coefficient * sum_i w_i KL(p_i || q_i),
    with q the student's tempered softmax; the hard part is lambda3 times the
    cross-entropy at T = 1. Everything is averaged over the batch rows.

    Args:
        student (ModelParams): Current student parameters
        features (np.array): (B x d) batch
        labels (np.array): (B,) true classes of the batch
        targets (list): (coefficient, probs (B x C), row_weights (B,)) per soft target
        lambdas (tuple): (lambda1, lambda2, lambda3); only lambda3 is read here
        temperature (float): Soft temperature T

    Returns:
        tuple: (loss, flat gradient)
    """
    rows = labels.size
    logits, layer_inputs = _forward_with_cache(student, features)
    soft = temp_softmax(logits, temperature)
    hard = temp_softmax(logits, 1.0)

    loss = 0.0
    dlogits = np.zeros_like(logits)
    for coefficient, probs, row_weights in targets:
        if coefficient == 0:
            continue
        divergences = kl_divergence(probs, soft)
        loss += coefficient * float(np.dot(row_weights, divergences)) / rows
        mass = probs.sum(axis=1, keepdims=True)
        dlogits += coefficient * row_weights[:, None] * (soft * mass - probs) / temperature

    lambda3 = lambdas[2]
    if lambda3 != 0:
        picked = hard[np.arange(rows), labels]
        loss += lambda3 * float(np.mean(-np.log(np.maximum(picked, 1e-12))))
        onehot = np.zeros_like(hard)
        onehot[np.arange(rows), labels] = 1.0
        dlogits += lambda3 * (hard - onehot)

    dlogits /= rows

    return loss, _backward(student, layer_inputs, dlogits)
