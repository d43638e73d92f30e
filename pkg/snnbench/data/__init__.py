"""MNIST ingestion and preprocessing."""

from .fetch import MnistDownloader, ensure_mnist
from .mnist import (
    Dataset,
    MnistSplits,
    PoolSpec,
    downscale,
    load_idx,
    load_mask,
    load_mnist,
    prepare_splits,
    save_mask,
)

__all__ = [
    "Dataset",
    "MnistDownloader",
    "MnistSplits",
    "PoolSpec",
    "downscale",
    "ensure_mnist",
    "load_idx",
    "load_mask",
    "load_mnist",
    "prepare_splits",
    "save_mask",
]
