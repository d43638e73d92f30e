"""
snnbench - Dense Feed-Forward Networks
Bias-free ReLU perceptrons and their forward pass.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Sequence

import numpy as np

from ..exceptions import ShapeError

OutputHead = Literal["relu", "softmax"]
LossKind = Literal["cross_entropy", "mse", "hinge_winner_runnerup"]

OUTPUT_HEADS = ("relu", "softmax")
LOSS_KINDS = ("cross_entropy", "mse", "hinge_winner_runnerup")


@dataclass
class AnnModel:
    """
    Bias-free dense network.

    ``weights[i]`` has shape ``(layer_dims[i + 1], layer_dims[i])`` so a layer
    computes ``max(0, W a)``. There are no bias parameters anywhere.
    """

    layer_dims: List[int]
    weights: List[np.ndarray]
    output_head: str = "softmax"
    loss: str = "cross_entropy"
    non_negative: bool = False
    history: List[float] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.layer_dims = [int(d) for d in self.layer_dims]
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        if len(self.layer_dims) < 2:
            raise ShapeError("a model needs at least an input and an output layer")
        if len(self.weights) != len(self.layer_dims) - 1:
            raise ShapeError(
                f"{len(self.layer_dims)} layers need {len(self.layer_dims) - 1} "
                f"weight matrices, got {len(self.weights)}"
            )
        for i, w in enumerate(self.weights):
            expected = (self.layer_dims[i + 1], self.layer_dims[i])
            if w.shape != expected:
                raise ShapeError(f"weight {i} has shape {w.shape}, expected {expected}")
        if self.output_head not in OUTPUT_HEADS:
            raise ValueError(f"unknown output head {self.output_head!r}")
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.loss == "cross_entropy" and self.output_head != "softmax":
            raise ValueError("cross_entropy loss requires the softmax output head")
        if self.loss == "hinge_winner_runnerup" and self.output_head != "relu":
            raise ValueError("hinge loss acts on raw scores and requires the relu head")

    @classmethod
    def create(
        cls,
        layer_dims: Sequence[int],
        output_head: OutputHead = "softmax",
        loss: LossKind = "cross_entropy",
        non_negative: bool = False,
        seed: int = 0,
    ) -> "AnnModel":
        """
        Build a model with Glorot-uniform weights.

        Non-negative models draw from ``[0, limit]`` instead of ``±limit``.

        Example:
            >>> model = AnnModel.create([89, 100, 10], seed=1)
            >>> model.parameter_count
            9900
        """
        rng = np.random.default_rng(seed)
        weights = []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            low = 0.0 if non_negative else -limit
            weights.append(rng.uniform(low, limit, size=(fan_out, fan_in)))
        return cls(list(layer_dims), weights, output_head, loss, non_negative)

    @property
    def parameter_count(self) -> int:
        return sum(w.size for w in self.weights)

    @property
    def hidden_neurons(self) -> int:
        return sum(self.layer_dims[1:-1])

    def copy(self) -> "AnnModel":
        return AnnModel(
            list(self.layer_dims),
            [w.copy() for w in self.weights],
            self.output_head,
            self.loss,
            self.non_negative,
            list(self.history),
            dict(self.provenance),
        )


@dataclass
class ForwardPass:
    """Activations of every layer for a batch.

    ``activations[0]`` is the input, ``activations[-1]`` the head output and
    ``logits`` the output layer before the head.
    """

    activations: List[np.ndarray]
    logits: np.ndarray

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


def apply_head(model: AnnModel, logits: np.ndarray) -> np.ndarray:
    return softmax(logits) if model.output_head == "softmax" else relu(logits)


def forward_batch(model: AnnModel, x: np.ndarray) -> ForwardPass:
    """Forward pass for a 2-D batch (samples x inputs)."""
    if x.ndim != 2 or x.shape[1] != model.layer_dims[0]:
        raise ShapeError(
            f"input of shape {x.shape} does not match input layer {model.layer_dims[0]}"
        )
    activations = [x]
    a = x
    for w in model.weights[:-1]:
        a = relu(a @ w.T)
        activations.append(a)
    logits = a @ model.weights[-1].T
    activations.append(apply_head(model, logits))
    return ForwardPass(activations, logits)


def forward(model: AnnModel, x: np.ndarray) -> ForwardPass:
    """
    Activations of every layer for one input vector or a batch.

    A 1-D input yields 1-D activations.
    """
    x = np.asarray(x)
    if x.ndim == 1:
        fp = forward_batch(model, x[None, :])
        return ForwardPass([a[0] for a in fp.activations], fp.logits[0])
    return forward_batch(model, x)


def predict(model: AnnModel, images: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Class index with the highest output for every row."""
    out = [
        forward_batch(model, images[i : i + chunk]).logits.argmax(axis=1)
        for i in range(0, len(images), chunk)
    ]
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def evaluate(model: AnnModel, dataset) -> float:
    """Fraction of correctly classified samples."""
    if len(dataset) == 0:
        return 0.0
    return float(np.mean(predict(model, dataset.images) == dataset.labels))
