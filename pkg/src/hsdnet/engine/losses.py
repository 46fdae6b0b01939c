"""Loss functions and output seeds."""

import numpy as np

from . import ops


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over the batch and its gradient w.r.t. the logits."""
    labels = np.asarray(labels, dtype=np.int64)
    n = logits.shape[0]
    log_probs = ops.log_softmax(logits)
    loss = float(-log_probs[np.arange(n), labels].mean())
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def true_class_probability_seed(probabilities: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d p_{y_i} / d z_j for every sample i: ``p_y (1[j = y] - p_j)``.

    Seeding :func:`backward` with this gives, per sample, the derivative of
    the ground-truth class probability.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = probabilities.shape[0]
    p_true = probabilities[np.arange(n), labels]
    seed = -p_true[:, None] * probabilities
    seed[np.arange(n), labels] += p_true
    return seed
