"""
snnbench - Network Conversion and Classification
Turn a trained AnnModel into an SnnNetwork and classify samples by output spikes.
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..ann.model import AnnModel
from ..config import config
from ..exceptions import ShapeError
from ..snn.network import SnnNetwork, SpikeStats
from ..snn.params import LifParams
from ..snn.simulator import Simulator
from ..snn.trains import n_steps
from .coding import encode_batch
from .config import ConversionConfig
from .normalize import normalize_weights

logger = logging.getLogger("snnbench")


@dataclass
class ClassifiedBatch:
    """
    Predictions derived from output spike counts.

    ``predictions[i]`` is the argmax of ``counts[i]`` with ties going to the
    lowest class index; ``ties`` and ``no_spike`` flag the samples where
    that rule decided.
    """

    predictions: np.ndarray
    counts: np.ndarray
    ties: np.ndarray
    no_spike: np.ndarray
    labels: Optional[np.ndarray] = None
    layer_counts: Optional[Dict[int, np.ndarray]] = None
    stats: Optional[SpikeStats] = None

    def __len__(self) -> int:
        return len(self.predictions)

    @classmethod
    def from_counts(
        cls,
        counts: np.ndarray,
        labels: Optional[np.ndarray] = None,
        layer_counts: Optional[Dict[int, np.ndarray]] = None,
        stats: Optional[SpikeStats] = None,
    ) -> "ClassifiedBatch":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.size == 0:
            empty = np.zeros(len(counts), dtype=bool)
            predictions = np.zeros(len(counts), dtype=np.int64)
            return cls(
                predictions, counts, empty, empty.copy(), labels, layer_counts, stats
            )
        peak = counts.max(axis=1)
        predictions = counts.argmax(axis=1)
        ties = (counts == peak[:, None]).sum(axis=1) > 1
        return cls(predictions, counts, ties, peak == 0, labels, layer_counts, stats)

    @property
    def accuracy(self) -> float:
        """Fraction of correct predictions; requires labels."""
        if self.labels is None:
            raise ValueError("batch was classified without labels")
        if len(self) == 0:
            return 0.0
        return float(np.mean(self.predictions == self.labels))

    @classmethod
    def concatenate(cls, parts: List["ClassifiedBatch"]) -> "ClassifiedBatch":
        labels = None
        if parts and all(p.labels is not None for p in parts):
            labels = np.concatenate([p.labels for p in parts])
        layer_counts = None
        if parts and all(p.layer_counts is not None for p in parts):
            layer_counts = {
                layer: np.concatenate([p.layer_counts[layer] for p in parts])
                for layer in parts[0].layer_counts
            }
        stats = None
        for p in parts:
            if p.stats is not None:
                stats = p.stats if stats is None else stats.merge(p.stats)
        return cls(
            np.concatenate([p.predictions for p in parts]),
            np.concatenate([p.counts for p in parts]),
            np.concatenate([p.ties for p in parts]),
            np.concatenate([p.no_spike for p in parts]),
            labels,
            layer_counts,
            stats,
        )

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write ``sample_id,true,predicted,count_0..count_k`` rows."""
        n_classes = self.counts.shape[1] if self.counts.ndim == 2 else 0
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            header = ["sample_id", "true", "predicted"]
            writer.writerow(header + [f"count_{c}" for c in range(n_classes)])
            for i in range(len(self)):
                true = "" if self.labels is None else int(self.labels[i])
                row = [i, true, int(self.predictions[i])]
                writer.writerow(row + self.counts[i].tolist())


def convert(model: AnnModel, lif: LifParams, cfg: ConversionConfig) -> SnnNetwork:
    """
    Map a trained network onto IF_cond_exp populations.

    Layer sizes are copied, weights come from ``normalize_weights`` and the
    output layer is recorded. The output head plays no part: the last
    population receives the pre-head linear weights.
    """
    weights = normalize_weights(model, cfg)
    n_pops = len(model.layer_dims) - 1
    return SnnNetwork(
        layers=list(model.layer_dims),
        weights=weights,
        lif=[lif] * n_pops,
        dt=cfg.dt,
        recorded=(n_pops,),
    )


class LaneRaster:
    """
    Input raster of samples shown back to back on parallel lanes.

    Lane ``r`` presents a contiguous block of samples one after another, each for
    ``t_present`` followed by ``t_gap`` of silence. Steps are produced on
    demand so long runs do not hold the full raster.
    """

    ndim = 3

    def __init__(
        self,
        images: np.ndarray,
        lanes: int,
        cfg: ConversionConfig,
        first_sample: int = 0,
    ):
        self.images = images
        self.cfg = cfg
        self.first_sample = first_sample
        self.lanes = max(1, min(lanes, len(images)))
        self.per_lane = -(-len(images) // self.lanes) if len(images) else 0
        self.period_steps = n_steps(cfg.period, cfg.dt)
        self.present_steps = n_steps(cfg.t_present, cfg.dt)
        self.shape = (self.per_lane * self.period_steps, self.lanes, images.shape[1])
        self._slot = -1
        self._block: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.shape[0]

    def sample_index(self, lane: int, slot: int) -> int:
        return lane * self.per_lane + slot

    def windows(self) -> List[Tuple[int, int]]:
        return [
            (k * self.period_steps, k * self.period_steps + self.present_steps)
            for k in range(self.per_lane)
        ]

    def _load_slot(self, slot: int) -> None:
        rows = np.zeros((self.lanes, self.images.shape[1]))
        present = np.zeros(self.lanes, dtype=bool)
        for lane in range(self.lanes):
            i = self.sample_index(lane, slot)
            if i < len(self.images):
                rows[lane] = self.images[i]
                present[lane] = True
        # per-sample streams keep Poisson input independent of the lane layout
        shape = (self.present_steps, self.lanes, self.images.shape[1])
        block = np.zeros(shape, dtype=np.uint8)
        for lane in np.nonzero(present)[0]:
            i = self.sample_index(lane, slot)
            block[:, lane : lane + 1] = encode_batch(
                rows[lane : lane + 1], self.cfg, self.first_sample + i
            )
        self._slot, self._block = slot, block

    def __getitem__(self, t: int) -> np.ndarray:
        slot, offset = divmod(t, self.period_steps)
        if offset >= self.present_steps:
            return np.zeros(self.shape[1:], dtype=np.uint8)
        if slot != self._slot:
            self._load_slot(slot)
        return self._block[offset]


def _classify_reset_chunk(
    sim: Simulator,
    images: np.ndarray,
    cfg: ConversionConfig,
    first_sample: int,
    keep_layers: bool,
) -> Tuple[np.ndarray, Optional[Dict[int, np.ndarray]], SpikeStats]:
    raster = encode_batch(images, cfg, first_sample)
    present = len(raster)
    record = sim.run(
        raster, duration=cfg.period, windows=[(0, present)], record_events=()
    )
    out = sim.net.output_layer
    counts = record.layer_counts(out)
    layers = None
    if keep_layers:
        layers = {layer: record.layer_counts(layer) for layer in record.counts}
    return counts, layers, record.stats


def _classify_lane_chunk(
    sim: Simulator,
    images: np.ndarray,
    cfg: ConversionConfig,
    first_sample: int,
    lanes: int,
    keep_layers: bool,
) -> Tuple[np.ndarray, Optional[Dict[int, np.ndarray]], SpikeStats]:
    source = LaneRaster(images, lanes, cfg, first_sample)
    record = sim.run(source, windows=source.windows(), record_events=())
    # (slots, lanes, n) -> sample order lane-major
    order = [
        (lane, slot)
        for lane in range(source.lanes)
        for slot in range(source.per_lane)
        if source.sample_index(lane, slot) < len(images)
    ]
    lane_idx = np.array([o[0] for o in order], dtype=np.int64)
    slot_idx = np.array([o[1] for o in order], dtype=np.int64)

    def gather(layer: int) -> np.ndarray:
        return record.counts[layer][slot_idx, lane_idx]

    counts = gather(sim.net.output_layer)
    layers = {layer: gather(layer) for layer in record.counts} if keep_layers else None
    return counts, layers, record.stats


def classify(
    net: SnnNetwork,
    batch,
    cfg: ConversionConfig,
    simulator: Optional[Simulator] = None,
    record_layers: bool = False,
    lanes: Optional[int] = None,
    workers: Optional[int] = None,
    first_sample: int = 0,
) -> ClassifiedBatch:
    """
    Present every sample and predict the class with the most output spikes.

    Args:
        net: converted network
        batch: Dataset or array of images (samples x inputs)
        cfg: presentation settings
        simulator: simulator bound to ``net``; defaults to the nominal one.
            A given simulator runs its chunks sequentially.
        record_layers: keep per-sample spike counts of every layer
        lanes: parallel rows when samples are not reset
            (``cfg.reset_between_samples`` False); defaults to the chunk size
        workers: concurrent chunks for the nominal simulator
        first_sample: global index of the first row, selects Poisson streams

    Returns:
        ClassifiedBatch in sample order
    """
    images = np.asarray(getattr(batch, "images", batch), dtype=np.float64)
    labels = getattr(batch, "labels", None)
    if images.ndim != 2 or images.shape[1] != net.layers[0]:
        raise ShapeError(
            f"batch of shape {images.shape} does not match input layer {net.layers[0]}"
        )

    chunk = config.runtime.chunk_size
    lanes = lanes or chunk
    if not cfg.reset_between_samples:
        # lanes keep their state across samples, so all samples form one chunk
        chunk = max(len(images), 1)
    starts = list(range(0, len(images), chunk))

    def run_chunk(start: int):
        sim = simulator if simulator is not None else Simulator(net, seed=cfg.seed)
        part = images[start : start + chunk]
        if cfg.reset_between_samples:
            return _classify_reset_chunk(
                sim, part, cfg, first_sample + start, record_layers
            )
        return _classify_lane_chunk(
            sim, part, cfg, first_sample + start, lanes, record_layers
        )

    n_workers = 1 if simulator is not None else (workers or config.runtime.workers)
    if n_workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run_chunk, starts))
    else:
        results = [run_chunk(s) for s in starts]

    parts = []
    for start, (counts, layers, stats) in zip(starts, results):
        part_labels = None
        if labels is not None:
            part_labels = np.asarray(labels)[start : start + chunk]
        parts.append(ClassifiedBatch.from_counts(counts, part_labels, layers, stats))
    if not parts:
        n_out = net.layers[-1]
        empty_labels = None if labels is None else np.zeros(0, dtype=np.int64)
        return ClassifiedBatch.from_counts(np.zeros((0, n_out)), empty_labels)

    result = ClassifiedBatch.concatenate(parts)
    logger.debug(
        f"Classified {len(result)} samples: {int(result.ties.sum())} ties, "
        f"{int(result.no_spike.sum())} without output spikes"
    )
    return result
