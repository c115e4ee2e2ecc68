import logging
from typing import List

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from network.config import TrainConfig, OutputHead
from network.model import Network, forward_pass, activation_derivative, softmax

logger = logging.getLogger(__name__)

LOG_FLOOR = 1e-12


def smoothed_targets(labels: NDArray[np.int64], num_classes: int, alpha: float) -> NDArray[np.float64]:
    """Targets ``(1 - alpha) * onehot + alpha / d``; the uniform part includes the true class."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(f"Labels must be in [0, {num_classes})")
    targets = np.full((labels.shape[0], num_classes), alpha / num_classes)
    targets[np.arange(labels.shape[0]), labels] += 1.0 - alpha
    return targets


def cross_entropy_loss(scores: NDArray[np.float64], labels: NDArray[np.int64], alpha: float = 0.0) -> float:
    """
    Mean cross-entropy between score vectors and (optionally smoothed) targets.

    Scores are floored at ``LOG_FLOOR`` before the log, so a zero score for the
    true class gives a large finite loss instead of infinity.

    Args:
        scores: ``(n, d)`` score vectors
        labels: ``n`` class indices
        alpha: Label smoothing factor in [0, 1)

    Returns:
        Non-negative loss
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    targets = smoothed_targets(labels, scores.shape[1], alpha)
    log_scores = np.log(np.maximum(scores, LOG_FLOOR))
    return float(-np.mean(np.sum(targets * log_scores, axis=1)))


def binary_cross_entropy(probabilities: NDArray[np.float64], labels: NDArray[np.int64]) -> float:
    """Mean binary cross-entropy with the same log floor."""
    p = np.asarray(probabilities, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    return float(-np.mean(y * np.log(np.maximum(p, LOG_FLOOR)) + (1.0 - y) * np.log(np.maximum(1.0 - p, LOG_FLOOR))))


def l2_penalty(net: Network, l2_lambda: float) -> float:
    """``lambda * sum ||W||^2`` over weight matrices (biases excluded)."""
    if l2_lambda == 0:
        return 0.0
    return float(l2_lambda * sum(np.sum(weight * weight) for weight, _ in net.layers))


def training_loss(net: Network, batch: NDArray[np.float64], labels: NDArray[np.int64],
                  train_config: TrainConfig) -> float:
    """The objective minimized by ``train``: data loss plus the L2 penalty."""
    logits = forward_pass(net, batch)[1][-1]
    if net.config.output is OutputHead.SIGMOID:
        data_loss = binary_cross_entropy(expit(logits[:, 0]), labels)
    else:
        data_loss = cross_entropy_loss(softmax(logits), labels, train_config.label_smoothing)
    return data_loss + l2_penalty(net, train_config.l2_lambda)


def backward(net: Network, batch: NDArray[np.float64], labels: NDArray[np.int64],
             train_config: TrainConfig) -> List[NDArray[np.float64]]:
    """
    Gradients of ``training_loss`` with respect to every parameter.

    Args:
        net: Network
        batch: ``(n, input_dim)`` inputs
        labels: ``n`` targets (class indices, or 0/1 for a sigmoid head)
        train_config: Supplies label smoothing and the L2 coefficient

    Returns:
        ``[dW1, db1, dW2, db2, ...]`` matching ``net.parameters``
    """
    inputs, pre_activations = forward_pass(net, batch)
    logits = pre_activations[-1]
    n = logits.shape[0]

    if net.config.output is OutputHead.SIGMOID:
        y = np.asarray(labels, dtype=np.float64).reshape(-1, 1)
        delta = (expit(logits) - y) / n
    else:
        targets = smoothed_targets(labels, logits.shape[1], train_config.label_smoothing)
        delta = (softmax(logits) - targets) / n

    grads: List[NDArray[np.float64]] = [None] * (2 * len(net.layers))
    for i in range(len(net.layers) - 1, -1, -1):
        weight, _ = net.layers[i]
        grad_w = delta.T @ inputs[i]
        if train_config.l2_lambda:
            grad_w = grad_w + 2.0 * train_config.l2_lambda * weight
        grads[2 * i] = grad_w
        grads[2 * i + 1] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weight) * activation_derivative(pre_activations[i - 1], net.config)
    return grads
