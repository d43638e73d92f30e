"""Bias-free dense networks, losses and back-propagation training."""

from .losses import loss_and_delta
from .model import AnnModel, ForwardPass, evaluate, forward, forward_batch, predict
from .serialization import import_weight_matrices, load_model, read_header, save_model
from .train import TrainConfig, apply_update, backprop, gradient, train

__all__ = [
    "AnnModel",
    "ForwardPass",
    "TrainConfig",
    "apply_update",
    "backprop",
    "evaluate",
    "forward",
    "forward_batch",
    "gradient",
    "import_weight_matrices",
    "load_model",
    "loss_and_delta",
    "predict",
    "read_header",
    "save_model",
    "train",
]
