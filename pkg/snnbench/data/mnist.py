"""
snnbench - MNIST Ingestion
IDX parsing, average-pool down-scaling, constant-pixel pruning and splits.
"""

import gzip
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pydantic import BaseModel, field_validator

from ..exceptions import DatasetConsistencyError, DatasetFormatError, ShapeError

logger = logging.getLogger("snnbench")

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"
MNIST_FILES = (TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS)

SplitTag = Literal["train", "eval", "test"]
PathLike = Union[str, Path]


@dataclass
class Dataset:
    """Images as rows of intensities in [0, 1] with class labels 0..9."""

    images: np.ndarray
    labels: np.ndarray
    split_tag: str = "train"
    shape: Optional[Tuple[int, int]] = None
    retained: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float32)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 2:
            raise ShapeError(f"images must be 2-D, got shape {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise DatasetConsistencyError(
                f"{len(self.images)} images but {len(self.labels)} labels"
            )
        if self.images.size and (self.images.min() < 0 or self.images.max() > 1):
            raise DatasetConsistencyError("pixel intensities must lie in [0, 1]")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() > 9):
            raise DatasetConsistencyError("labels must lie in 0..9")
        if self.shape is not None and self.shape[0] * self.shape[1] != self.input_dim:
            raise ShapeError(f"shape {self.shape} does not match {self.input_dim}")

    @property
    def input_dim(self) -> int:
        return int(self.images.shape[1])

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, start: int = 0, stop: Optional[int] = None) -> "Dataset":
        """Contiguous slice keeping tag, shape and pruning mask."""
        return Dataset(
            images=self.images[start:stop],
            labels=self.labels[start:stop],
            split_tag=self.split_tag,
            shape=self.shape,
            retained=self.retained,
        )

    def take(self, indices: np.ndarray) -> "Dataset":
        """Rows at the given indices, in that order."""
        return Dataset(
            images=self.images[indices],
            labels=self.labels[indices],
            split_tag=self.split_tag,
            shape=self.shape,
            retained=self.retained,
        )


class PoolSpec(BaseModel):
    """Average pooling and pruning settings."""

    window: Tuple[int, int] = (3, 3)
    stride: Tuple[int, int] = (3, 3)
    mode: Literal["average"] = "average"
    prune_constant_pixels: bool = True

    @field_validator("window", "stride")
    @classmethod
    def _positive(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if min(value) <= 0:
            raise ValueError("window and stride must be strictly positive")
        return value


@dataclass
class MnistSplits:
    train: Dataset
    eval: Dataset
    test: Dataset


def _read_idx(path: PathLike) -> bytes:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _parse_header(raw: bytes, expected_magic: int, n_dims: int, path: PathLike):
    header_len = 4 + 4 * n_dims
    if len(raw) < header_len:
        raise DatasetConsistencyError(f"{path}: file shorter than its header")
    magic = int.from_bytes(raw[0:4], "big")
    if magic != expected_magic:
        raise DatasetFormatError(
            f"{path}: bad magic number 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    dims = [int.from_bytes(raw[4 + 4 * i : 8 + 4 * i], "big") for i in range(n_dims)]
    return dims, raw[header_len:]


def load_idx(
    images_path: PathLike, labels_path: PathLike, split_tag: SplitTag = "train"
) -> Dataset:
    """
    Read an IDX image/label file pair.

    Args:
        images_path: idx3-ubyte image file (optionally gzip compressed)
        labels_path: idx1-ubyte label file (optionally gzip compressed)
        split_tag: tag stored on the returned dataset

    Returns:
        Dataset with flattened images divided by 255

    Example:
        >>> train = load_idx(
        ...     "mnist/train-images-idx3-ubyte", "mnist/train-labels-idx1-ubyte"
        ... )
        >>> train.input_dim
        784
    """
    (count, rows, cols), pixels = _parse_header(
        _read_idx(images_path), IMAGES_MAGIC, 3, images_path
    )
    (n_labels,), label_bytes = _parse_header(
        _read_idx(labels_path), LABELS_MAGIC, 1, labels_path
    )

    n_pixels = count * rows * cols
    if len(pixels) < n_pixels:
        raise DatasetConsistencyError(
            f"{images_path}: expected {n_pixels} pixel bytes, found {len(pixels)}"
        )
    if len(label_bytes) < n_labels:
        raise DatasetConsistencyError(
            f"{labels_path}: expected {n_labels} labels, found {len(label_bytes)}"
        )
    if count != n_labels:
        raise DatasetConsistencyError(f"{count} images but {n_labels} labels")

    images = np.frombuffer(pixels, dtype=np.uint8, count=n_pixels)
    images = images.reshape(count, rows * cols).astype(np.float32) / 255.0
    labels = np.frombuffer(label_bytes, dtype=np.uint8, count=n_labels)

    logger.info(
        f"Loaded {count} {split_tag} samples ({rows}x{cols}) from {images_path}"
    )
    return Dataset(
        images=images, labels=labels, split_tag=split_tag, shape=(rows, cols)
    )


def find_idx_file(data_dir: Path, name: str) -> Path:
    for candidate in (data_dir / name, data_dir / f"{name}.gz"):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"{name} not found in {data_dir}")


def idx_count(path: PathLike) -> int:
    """Item count from an IDX header; validates the magic number."""
    images = "images" in Path(path).name
    magic, n_dims = (IMAGES_MAGIC, 3) if images else (LABELS_MAGIC, 1)
    dims, _ = _parse_header(_read_idx(path), magic, n_dims, path)
    return dims[0]


def load_mnist(data_dir: PathLike, eval_size: int = 10000) -> MnistSplits:
    """
    Load MNIST and split it into train, evaluation and test sets.

    The last ``eval_size`` items of the train file form the evaluation split;
    the official t10k file is the test split.
    """
    data_dir = Path(data_dir)
    full = load_idx(
        find_idx_file(data_dir, TRAIN_IMAGES), find_idx_file(data_dir, TRAIN_LABELS)
    )
    test = load_idx(
        find_idx_file(data_dir, TEST_IMAGES),
        find_idx_file(data_dir, TEST_LABELS),
        "test",
    )
    if not 0 <= eval_size < len(full):
        raise ValueError(f"eval_size must lie in [0, {len(full)})")

    cut = len(full) - eval_size
    train = full.subset(0, cut)
    held_out = full.subset(cut)
    held_out.split_tag = "eval"
    return MnistSplits(train=train, eval=held_out, test=test)


def _pool(images: np.ndarray, shape: Tuple[int, int], spec: PoolSpec):
    (h, w), (wh, ww), (sh, sw) = shape, spec.window, spec.stride
    out_h = -(-max(h - wh, 0) // sh) + 1
    out_w = -(-max(w - ww, 0) // sw) + 1
    pad_h = (out_h - 1) * sh + wh - h
    pad_w = (out_w - 1) * sw + ww - w

    grid = images.reshape(-1, h, w)
    grid = np.pad(grid, ((0, 0), (0, pad_h), (0, pad_w)))
    windows = sliding_window_view(grid, (wh, ww), axis=(1, 2))[:, ::sh, ::sw]
    pooled = windows.mean(axis=(-2, -1), dtype=np.float64)
    return pooled.reshape(len(images), out_h * out_w).astype(np.float32), (out_h, out_w)


def nonzero_positions(images: np.ndarray) -> np.ndarray:
    """Indices of positions that are non-zero in at least one image."""
    return np.flatnonzero(images.max(axis=0) > 0)


def downscale(d: Dataset, spec: PoolSpec, mask: Optional[np.ndarray] = None) -> Dataset:
    """
    Average-pool every image and optionally prune constant-zero positions.

    Images are zero-padded on the right/bottom so the windows tile the image;
    padded pixels count towards the window average.

    Args:
        d: dataset with a known 2-D ``shape``
        spec: pooling settings
        mask: retained indices computed on the train split; when pruning is
            enabled and no mask is given, ``d`` must be the train split

    Returns:
        Pooled (and pruned) dataset; the mask is kept in ``retained``
    """
    if d.shape is None:
        raise ShapeError("downscale needs images with a known 2-D shape")

    pooled, out_shape = _pool(d.images, d.shape, spec)
    if not spec.prune_constant_pixels:
        return Dataset(pooled, d.labels, d.split_tag, shape=out_shape)

    if mask is None:
        if d.split_tag != "train":
            raise ValueError("pruning mask must be computed on the train split")
        mask = nonzero_positions(pooled)
        logger.info(
            f"Pruning keeps {len(mask)} of {pooled.shape[1]} pooled positions"
        )
    mask = np.asarray(mask, dtype=np.int64)
    return Dataset(pooled[:, mask], d.labels, d.split_tag, shape=None, retained=mask)


def prepare_splits(splits: MnistSplits, spec: PoolSpec) -> MnistSplits:
    """Down-scale all splits with the pruning mask of the train split."""
    train = downscale(splits.train, spec)
    return MnistSplits(
        train=train,
        eval=downscale(splits.eval, spec, train.retained),
        test=downscale(splits.test, spec, train.retained),
    )


def save_mask(path: PathLike, mask: np.ndarray) -> None:
    """Store retained indices as a JSON list."""
    Path(path).write_text(json.dumps([int(i) for i in mask]))


def load_mask(path: PathLike) -> np.ndarray:
    indices: List[int] = json.loads(Path(path).read_text())
    return np.asarray(indices, dtype=np.int64)
