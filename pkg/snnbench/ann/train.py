"""
snnbench - Back-Propagation Training
Batch gradient descent for bias-free perceptrons.
"""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..exceptions import DivergenceError, ShapeError
from ..metrics import record_training_epoch
from .losses import loss_and_delta
from .model import AnnModel, ForwardPass, forward_batch

logger = logging.getLogger("snnbench")


class TrainConfig(BaseModel):
    """Gradient-descent hyperparameters."""

    learning_rate: float = Field(default=0.05, gt=0)
    batch_size: int = Field(default=64, ge=1)
    epochs: int = Field(default=30, ge=0)
    rng_seed: int = 0
    l2: float = Field(default=0.0, ge=0)


def backprop(
    model: AnnModel, fp: ForwardPass, labels: np.ndarray
) -> Tuple[float, List[np.ndarray]]:
    """
    Back-propagate the configured loss through a recorded forward pass.

    The forward pass does not have to come from ``forward``: any activations
    of the right shapes (e.g. rates measured on a device) are treated as if
    the network had produced them. ReLU derivatives are taken from the
    given activations.

    Returns:
        (mean loss, gradient per weight matrix)
    """
    labels = np.asarray(labels)
    loss, delta = loss_and_delta(
        model.loss, model.output_head, fp.logits, fp.output, labels
    )
    grads: List[np.ndarray] = [np.empty(0)] * len(model.weights)
    for layer in reversed(range(len(model.weights))):
        grads[layer] = delta.T @ fp.activations[layer]
        if layer > 0:
            delta = (delta @ model.weights[layer]) * (fp.activations[layer] > 0)
    return loss, grads


def gradient(
    model: AnnModel, inputs: np.ndarray, labels: np.ndarray
) -> Tuple[float, List[np.ndarray]]:
    """Analytic gradient of the configured loss for a non-empty batch."""
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    if len(inputs) == 0:
        raise ShapeError("gradient needs a non-empty batch")
    return backprop(model, forward_batch(model, inputs), labels)


def apply_update(
    model: AnnModel, grads: List[np.ndarray], learning_rate: float, l2: float = 0.0
) -> None:
    """In-place descent step, followed by the non-negativity projection."""
    for w, g in zip(model.weights, grads):
        w -= learning_rate * (g + l2 * w)
        if model.non_negative:
            np.maximum(w, 0.0, out=w)


def train(
    model: AnnModel,
    train_set,
    cfg: TrainConfig,
    on_epoch: Optional[Callable[[int, float], None]] = None,
) -> AnnModel:
    """
    Train a copy of ``model`` with mini-batch gradient descent.

    Args:
        model: starting point, left untouched
        train_set: Dataset whose input_dim matches the input layer
        cfg: hyperparameters
        on_epoch: optional callback receiving (epoch, mean loss)

    Returns:
        Trained model; the mean loss of every epoch is appended to ``history``

    Example:
        >>> model = AnnModel.create([89, 100, 10])
        >>> trained = train(model, splits.train, TrainConfig(epochs=5))
    """
    if train_set.input_dim != model.layer_dims[0]:
        raise ShapeError(
            f"dataset input_dim {train_set.input_dim} does not match "
            f"input layer {model.layer_dims[0]}"
        )

    trained = model.copy()
    rng = np.random.default_rng(cfg.rng_seed)
    n = len(train_set)

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        for batch, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            images, labels = train_set.images[idx], train_set.labels[idx]
            loss, grads = gradient(trained, images, labels)
            if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
                raise DivergenceError("non-finite loss", epoch, batch)
            apply_update(trained, grads, cfg.learning_rate, cfg.l2)
            losses.append(loss)

        mean_loss = float(np.mean(losses)) if losses else 0.0
        trained.history.append(mean_loss)
        record_training_epoch(mean_loss, n)
        logger.info(f"Epoch {epoch + 1}/{cfg.epochs}: loss {mean_loss:.4f}")
        if on_epoch is not None:
            on_epoch(epoch, mean_loss)

    return trained
