"""
snnbench - Loss Functions
Loss values and their gradient with respect to the output-layer logits.
"""

from typing import Tuple

import numpy as np

HINGE_MARGIN = 1.0
_EPS = 1e-12


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    targets = np.zeros((len(labels), n_classes))
    targets[np.arange(len(labels)), labels] = 1.0
    return targets


def runner_up(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Highest-scoring wrong class of every row."""
    masked = scores.copy()
    masked[np.arange(len(labels)), labels] = -np.inf
    return masked.argmax(axis=1)


def _head_backward(
    head: str, logits: np.ndarray, output: np.ndarray, grad_out: np.ndarray
) -> np.ndarray:
    if head == "relu":
        return grad_out * (logits > 0)
    # softmax Jacobian-vector product
    return output * (grad_out - np.sum(grad_out * output, axis=1, keepdims=True))


def loss_and_delta(
    kind: str,
    head: str,
    logits: np.ndarray,
    output: np.ndarray,
    labels: np.ndarray,
    margin: float = HINGE_MARGIN,
) -> Tuple[float, np.ndarray]:
    """
    Mean batch loss and its gradient with respect to ``logits``.

    Args:
        kind: cross_entropy, mse or hinge_winner_runnerup
        head: relu or softmax
        logits: output layer before the head (batch x classes)
        output: head output (batch x classes)
        labels: true class indices

    Returns:
        (loss, dL/dlogits)
    """
    batch, n_classes = output.shape
    rows = np.arange(batch)

    if kind == "cross_entropy":
        loss = -np.mean(np.log(output[rows, labels] + _EPS))
        return float(loss), (output - one_hot(labels, n_classes)) / batch

    if kind == "mse":
        diff = output - one_hot(labels, n_classes)
        loss = 0.5 * np.mean(np.sum(diff**2, axis=1))
        return float(loss), _head_backward(head, logits, output, diff / batch)

    if kind == "hinge_winner_runnerup":
        second = runner_up(output, labels)
        violation = margin - (output[rows, labels] - output[rows, second])
        active = violation > 0
        grad_out = np.zeros_like(output)
        # only the true class and the runner-up receive an update
        grad_out[rows[active], labels[active]] = -1.0 / batch
        grad_out[rows[active], second[active]] = 1.0 / batch
        loss = np.mean(np.maximum(violation, 0.0))
        return float(loss), _head_backward(head, logits, output, grad_out)

    raise ValueError(f"unknown loss {kind!r}")
