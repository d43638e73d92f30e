"""
snnbench - Spiking Network Containers
Layered network description and the spike record a run produces.
"""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ShapeError
from .params import LifParams


@dataclass
class SnnNetwork:
    """
    Feed-forward populations of IF_cond_exp neurons.

    Layer 0 holds the spike sources, every further layer is a LIF population.
    ``weights[i]`` maps layer i to layer i+1 with shape ``(out, in)`` in µS;
    positive entries target the excitatory channel, negative ones the
    inhibitory channel with magnitude ``|w|``.
    """

    layers: List[int]
    weights: List[np.ndarray]
    lif: List[LifParams]
    dt: float = 1.0
    recorded: Tuple[int, ...] = ()

    def __post_init__(self):
        self.layers = [int(n) for n in self.layers]
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        if isinstance(self.lif, LifParams):
            self.lif = [self.lif] * (len(self.layers) - 1)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if len(self.weights) != len(self.layers) - 1:
            raise ShapeError("one weight matrix per projection is required")
        if len(self.lif) != len(self.layers) - 1:
            raise ShapeError("one LifParams per neuron population is required")
        for i, w in enumerate(self.weights):
            if w.shape != (self.layers[i + 1], self.layers[i]):
                raise ShapeError(
                    f"projection {i} has shape {w.shape}, expected "
                    f"{(self.layers[i + 1], self.layers[i])}"
                )
        if not self.recorded:
            self.recorded = (len(self.layers) - 1,)

    @property
    def output_layer(self) -> int:
        return len(self.layers) - 1

    @property
    def neuron_count(self) -> int:
        """All neurons including the spike sources."""
        return sum(self.layers)


@dataclass
class SpikeStats:
    """Per-layer spike accounting of one run."""

    generated: List[int]
    delivered: List[int]
    presynaptic_events: int = 0
    synaptic_events: int = 0

    @property
    def dropped(self) -> List[int]:
        return [g - d for g, d in zip(self.generated, self.delivered)]

    def merge(self, other: "SpikeStats") -> "SpikeStats":
        return SpikeStats(
            [a + b for a, b in zip(self.generated, other.generated)],
            [a + b for a, b in zip(self.delivered, other.delivered)],
            self.presynaptic_events + other.presynaptic_events,
            self.synaptic_events + other.synaptic_events,
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "generated": self.generated,
            "delivered": self.delivered,
            "dropped": self.dropped,
            "presynaptic_events": self.presynaptic_events,
            "synaptic_events": self.synaptic_events,
        }


@dataclass
class SpikeRecord:
    """
    Spikes of a (possibly multi-instance) run.

    ``counts[layer]`` has shape ``(windows, instances, neurons)``: spikes per
    counting window. ``events[layer]`` holds ``(step, instance, neuron)``
    arrays in emission order for layers whose events were recorded.
    """

    dt: float
    steps: int
    counts: Dict[int, np.ndarray]
    events: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = field(
        default_factory=dict
    )
    stats: Optional[SpikeStats] = None

    @property
    def duration(self) -> float:
        return self.steps * self.dt

    @staticmethod
    def _stamp_offset(layer: int) -> int:
        return 0 if layer == 0 else 1

    def layer_counts(self, layer: int, window: int = 0) -> np.ndarray:
        """Spike counts (instances x neurons) of one window."""
        return self.counts[layer][window]

    def spike_times(self, layer: int, neuron: int, instance: int = 0) -> np.ndarray:
        """
        Ordered spike times in ms of one neuron.

        Neuron spikes are stamped at the end of the step in which the threshold
        was crossed; input spikes keep the time of their train.
        """
        if layer not in self.events:
            raise KeyError(f"events of layer {layer} were not recorded")
        steps, instances, neurons = self.events[layer]
        hit = (instances == instance) & (neurons == neuron)
        return (steps[hit] + self._stamp_offset(layer)) * self.dt

    def summary(self) -> Dict[str, object]:
        """JSON-ready per-layer spike counts."""
        layers = {
            str(layer): {
                "total": int(c.sum()),
                "per_neuron": c.sum(axis=(0, 1)).astype(int).tolist(),
            }
            for layer, c in sorted(self.counts.items())
        }
        out: Dict[str, object] = {"duration_ms": self.duration, "layers": layers}
        if self.stats is not None:
            out["stats"] = self.stats.to_dict()
        return out

    def to_json(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True))

    def to_csv(self, path: Union[str, Path], layer: int, instance: int = 0) -> None:
        """Write ``neuron_id,time_ms`` rows of one layer and instance."""
        if layer not in self.events:
            raise KeyError(f"events of layer {layer} were not recorded")
        steps, instances, neurons = self.events[layer]
        hit = instances == instance
        offset = self._stamp_offset(layer)
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["neuron_id", "time_ms"])
            for neuron, step in zip(neurons[hit], steps[hit]):
                time = (step + offset) * self.dt
                writer.writerow([int(neuron), repr(float(time))])


def stack_events(
    chunks: Sequence[Tuple[int, np.ndarray]],
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Concatenate per-step ``(step, nonzero(spikes))`` chunks."""
    if not chunks:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy(), empty.copy()
    steps = np.concatenate([np.full(len(idx[0]), t) for t, idx in chunks])
    instances = np.concatenate([idx[0] for _, idx in chunks])
    neurons = np.concatenate([idx[1] for _, idx in chunks])
    return steps.astype(np.int64), instances.astype(np.int64), neurons.astype(np.int64)
