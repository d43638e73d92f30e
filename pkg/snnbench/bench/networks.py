"""
snnbench - Network Presets
Built-in architectures, trained on demand and cached as model files.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from ..ann.model import AnnModel, evaluate
from ..ann.serialization import load_model, save_model
from ..ann.train import TrainConfig, train
from ..config import config
from ..data.mnist import Dataset, MnistSplits, PoolSpec, downscale, load_mnist
from ..exceptions import ExperimentError
from ..nas.dagnet import DagAnn, genome_to_model, train_dag
from ..nas.genome import Genome

logger = logging.getLogger("snnbench")


class NetworkPreset(BaseModel):
    """Architecture, input preprocessing and training recipe of a built-in network."""

    hidden: List[int]
    pooled: bool = False
    output_head: str = "softmax"
    loss: str = "cross_entropy"
    non_negative: bool = False
    train: TrainConfig = Field(default_factory=TrainConfig)
    seed: int = 0


NETWORK_PRESETS: Dict[str, NetworkPreset] = {
    # 89x100x10 on the 3x3-pooled, pruned input
    "spikey": NetworkPreset(
        hidden=[100],
        pooled=True,
        output_head="relu",
        loss="hinge_winner_runnerup",
        non_negative=True,
        train=TrainConfig(learning_rate=0.01, epochs=30),
    ),
    "spikey_softmax": NetworkPreset(hidden=[100], pooled=True),
    "spikey_relu": NetworkPreset(
        hidden=[100], pooled=True, output_head="relu", loss="mse"
    ),
    "nas129": NetworkPreset(hidden=[129], train=TrainConfig(epochs=20)),
    "diehl": NetworkPreset(
        hidden=[1200, 1200], train=TrainConfig(learning_rate=0.02, epochs=10)
    ),
}


@dataclass
class NetworkBundle:
    """A trained model together with the data splits it consumes."""

    name: str
    model: AnnModel
    splits: MnistSplits

    @property
    def ann_accuracy(self) -> float:
        """Test accuracy in percent."""
        return 100.0 * evaluate(self.model, self.splits.test)


def pool_splits(
    splits: MnistSplits, retained: Optional[List[int]] = None
) -> MnistSplits:
    """3x3 average pooling with pruning; ``retained`` reuses a stored mask."""
    spec = PoolSpec()
    if retained is None:
        train_set = downscale(splits.train, spec)
        mask = train_set.retained
    else:
        mask = np.asarray(retained, dtype=np.int64)
        train_set = downscale(splits.train, spec, mask)
    return MnistSplits(
        train=train_set,
        eval=downscale(splits.eval, spec, mask),
        test=downscale(splits.test, spec, mask),
    )


def _matching_splits(model: AnnModel, splits: MnistSplits) -> MnistSplits:
    """Splits preprocessed the way the model's input layer expects."""
    pool = model.provenance.get("pool")
    if pool is not None:
        splits = pool_splits(splits, pool.get("retained"))
    if splits.train.input_dim != model.layer_dims[0]:
        raise ExperimentError(
            f"model input layer {model.layer_dims[0]} does not match "
            f"data with {splits.train.input_dim} inputs"
        )
    return splits


def train_preset(name: str, splits: MnistSplits) -> AnnModel:
    """Train a preset network from scratch on raw 28x28 splits."""
    preset = NETWORK_PRESETS[name]
    provenance: Dict[str, object] = {"preset": name}
    if preset.pooled:
        splits = pool_splits(splits)
        provenance["pool"] = {"retained": [int(i) for i in splits.train.retained]}
    dims = [splits.train.input_dim, *preset.hidden, 10]
    model = AnnModel.create(
        dims, preset.output_head, preset.loss, preset.non_negative, preset.seed
    )
    logger.info(f"Training preset {name} ({'x'.join(map(str, dims))})")
    trained = train(model, splits.train, preset.train)
    trained.provenance.update(provenance)
    return trained


def load_network(
    source: str,
    splits: Optional[MnistSplits] = None,
    cache_dir: Optional[Union[str, Path]] = None,
) -> NetworkBundle:
    """
    Resolve an experiment's network.

    Args:
        source: preset name, model file or genome JSON file
        splits: raw MNIST splits; loaded from ``config.data.dir`` when omitted
        cache_dir: where trained presets are kept

    Raises:
        ExperimentError: unknown preset or unreadable file
    """
    if splits is None:
        splits = load_mnist(config.data.dir, eval_size=config.data.eval_size)
    path = Path(source)

    if source in NETWORK_PRESETS:
        cache = Path(cache_dir or config.runtime.cache_dir)
        cached = cache / f"{source}-seed{NETWORK_PRESETS[source].seed}.snnb"
        if cached.exists():
            logger.info(f"Using cached preset {cached}")
            model = load_model(cached)
        else:
            model = train_preset(source, splits)
            save_model(cached, model)
    elif path.suffix == ".json" and path.exists():
        try:
            genome = Genome.from_dict(json.loads(path.read_text()))
        except (ValueError, KeyError) as e:
            raise ExperimentError(f"cannot read genome {path}: {e}") from e
        model = train_genome(genome, splits)
    elif path.exists():
        model = load_model(path)
    else:
        raise ExperimentError(
            f"unknown network {source!r}; presets: {', '.join(sorted(NETWORK_PRESETS))}"
        )
    return NetworkBundle(source, model, _matching_splits(model, splits))


def train_genome(
    genome: Genome, splits: MnistSplits, cfg: Optional[TrainConfig] = None
) -> AnnModel:
    """Train a sequential searched genome into a convertible model."""
    train_set: Dataset = splits.train
    if genome.input_dim != train_set.input_dim:
        pooled = pool_splits(splits)
        if genome.input_dim != pooled.train.input_dim:
            raise ExperimentError(
                f"genome input {genome.input_dim} matches no preprocessing"
            )
        train_set = pooled.train
    if not genome.is_sequential:
        raise ExperimentError("only sequential genomes can be converted")
    net = train_dag(DagAnn.create(genome), train_set, cfg or TrainConfig(epochs=20))
    model = genome_to_model(genome, net)
    if train_set is not splits.train:
        model.provenance["pool"] = {"retained": [int(i) for i in train_set.retained]}
    return model
