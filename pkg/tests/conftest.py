"""Shared fixtures: synthetic datasets, IDX files, small models and a ledger."""

import gzip
from pathlib import Path

import numpy as np
import pytest

from snnbench.ann.model import AnnModel
from snnbench.ann.train import TrainConfig, train
from snnbench.config import config
from snnbench.core import database
from snnbench.data.mnist import Dataset, MnistSplits

TOY_SHAPE = (4, 5)
TOY_DIM = TOY_SHAPE[0] * TOY_SHAPE[1]


def toy_dataset(n: int, seed: int = 0, split_tag: str = "train") -> Dataset:
    """Class ``c`` lights pixels ``2c`` and ``2c + 1``; other pixels carry weak noise."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 10, size=n)
    images = rng.uniform(0.0, 0.15, size=(n, TOY_DIM))
    images[np.arange(n), 2 * labels] = rng.uniform(0.8, 1.0, size=n)
    images[np.arange(n), 2 * labels + 1] = rng.uniform(0.8, 1.0, size=n)
    return Dataset(images, labels, split_tag, shape=TOY_SHAPE)


def write_idx(path: Path, magic: int, dims, payload: bytes, compress: bool = False) -> Path:
    header = magic.to_bytes(4, "big") + b"".join(d.to_bytes(4, "big") for d in dims)
    data = header + payload
    if compress:
        path = path.with_name(path.name + ".gz")
        path.write_bytes(gzip.compress(data))
    else:
        path.write_bytes(data)
    return path


def write_mnist_dir(directory: Path, n_train: int = 30, n_test: int = 10, side: int = 28) -> Path:
    """Four IDX files with random digits in ``directory``."""
    rng = np.random.default_rng(7)
    directory.mkdir(parents=True, exist_ok=True)
    for prefix, n in (("train", n_train), ("t10k", n_test)):
        pixels = rng.integers(0, 256, size=(n, side, side), dtype=np.uint8)
        labels = rng.integers(0, 10, size=n, dtype=np.uint8)
        write_idx(directory / f"{prefix}-images-idx3-ubyte", 0x803, (n, side, side), pixels.tobytes())
        write_idx(directory / f"{prefix}-labels-idx1-ubyte", 0x801, (n,), labels.tobytes())
    return directory


@pytest.fixture
def toy_splits() -> MnistSplits:
    return MnistSplits(
        train=toy_dataset(300, seed=1),
        eval=toy_dataset(60, seed=2, split_tag="eval"),
        test=toy_dataset(60, seed=3, split_tag="test"),
    )


@pytest.fixture
def toy_model(toy_splits) -> AnnModel:
    """Non-negative 20x16x10 ReLU network trained on the toy data."""
    model = AnnModel.create([TOY_DIM, 16, 10], "relu", "mse", non_negative=True, seed=0)
    return train(model, toy_splits.train, TrainConfig(learning_rate=0.1, batch_size=16, epochs=15))


@pytest.fixture
def mnist_dir(tmp_path) -> Path:
    return write_mnist_dir(tmp_path / "mnist")


@pytest.fixture
def ledger(tmp_path):
    database.init(f"sqlite:///{tmp_path / 'ledger.db'}")
    yield database
    database.close()


@pytest.fixture
def small_chunks(monkeypatch):
    monkeypatch.setattr(config.runtime, "chunk_size", 4)
    return 4


def real_mnist_dir() -> Path:
    return Path(config.data.dir)


requires_mnist = pytest.mark.skipif(
    not (real_mnist_dir() / "train-images-idx3-ubyte").exists()
    and not (real_mnist_dir() / "train-images-idx3-ubyte.gz").exists(),
    reason="MNIST not available in SNNBENCH_DATA_DIR",
)
