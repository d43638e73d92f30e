"""
snnbench - Device Emulation
Frozen per-circuit mismatch, trial-to-trial variation, membrane noise and
bandwidth-limited spike loss on top of the clock-driven simulator.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..conversion.config import ConversionConfig
from ..conversion.convert import ClassifiedBatch, classify
from ..conversion.normalize import quantize
from ..exceptions import ProfileConfigError, ShapeError
from ..metrics import record_device_run
from ..snn.network import SnnNetwork, SpikeRecord, SpikeStats
from ..snn.params import LifParams
from ..snn.simulator import PopulationParams, Simulator
from .profiles import HardwareProfile
from .scheduling import InstancePlan, schedule

logger = logging.getLogger("snnbench")

# stream tags keep the random sources of one device independent
_MISMATCH, _TRIAL, _NOISE, _LOSS = 0, 1, 2, 3


def lognormal_unit_mean(
    rng: np.random.Generator, cv: float, size: int
) -> np.ndarray:
    """Positive factors with mean 1 and coefficient of variation ``cv``."""
    if cv == 0:
        return np.ones(size)
    sigma2 = np.log1p(cv**2)
    return rng.lognormal(-sigma2 / 2.0, np.sqrt(sigma2), size)


class DeviceInstance:
    """
    One physical device: a profile plus frozen per-circuit parameter factors.

    Parallel network instances occupy separate slices of the device, so every
    instance slot has its own factors. Runs on one device are serialized.
    """

    def __init__(self, profile: HardwareProfile, seed: int = 0):
        self.profile = profile
        self.seed = seed
        self.runs = 0
        self.lock = threading.Lock()
        self._factors: Dict[Tuple[int, int, int], Tuple[np.ndarray, np.ndarray]] = {}

    def __repr__(self) -> str:
        return f"DeviceInstance(profile={self.profile.name!r}, seed={self.seed})"

    def _stream(self, *key: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, *key]))

    def mismatch(
        self, slot: int, layer: int, neurons: int
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Frozen ``(tau_m, threshold distance)`` factors of one population."""
        key = (slot, layer, neurons)
        if key not in self._factors:
            rng = self._stream(_MISMATCH, slot, layer)
            cv = self.profile.mismatch_cv
            tau = lognormal_unit_mean(rng, cv, neurons)
            thresh = lognormal_unit_mean(rng, cv, neurons)
            self._factors[key] = (tau, thresh)
        return self._factors[key]


def instantiate(profile: HardwareProfile, seed: int = 0) -> DeviceInstance:
    """
    Create a device whose circuits deviate from nominal by lognormal factors.

    Example:
        >>> dev = instantiate(load_profile("spikey"), seed=3)
        >>> tau_factors, _ = dev.mismatch(0, 1, 100)
    """
    return DeviceInstance(profile, seed)


@dataclass
class RunStats:
    """Accounting of one device run."""

    profile: str
    n_samples: int
    model_time_ms: float
    wall_clock_ms: float
    presynaptic_events: int
    synaptic_events: int
    generated: List[int]
    delivered: List[int]
    plan: Optional[InstancePlan] = None
    device_seed: int = 0
    run_index: int = 0

    @property
    def dropped(self) -> List[int]:
        return [g - d for g, d in zip(self.generated, self.delivered)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "profile": self.profile,
            "n_samples": self.n_samples,
            "model_time_ms": self.model_time_ms,
            "wall_clock_ms": self.wall_clock_ms,
            "presynaptic_events": self.presynaptic_events,
            "synaptic_events": self.synaptic_events,
            "generated": self.generated,
            "delivered": self.delivered,
            "dropped": self.dropped,
            "plan": self.plan.to_dict() if self.plan else None,
            "device_seed": self.device_seed,
            "run_index": self.run_index,
        }


class DeviceSimulator(Simulator):
    """Simulator whose hooks apply a device's imperfections to one instance slot."""

    def __init__(
        self, net: SnnNetwork, dev: DeviceInstance, run_index: int, slot: int = 0
    ):
        super().__init__(net, seed=dev.seed)
        self.dev = dev
        self.profile = dev.profile
        self.run_index = run_index
        self.slot = slot
        self._chunks = 0
        self._trial: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}
        self._out_tokens: Dict[int, np.ndarray] = {}
        self._loss_rng = np.random.default_rng(0)
        self._source: Any = None
        self._windows: List[Tuple[int, int]] = []
        self._window_of = np.zeros(0, dtype=np.int64)
        self._thinned: Optional[np.ndarray] = None
        self._thinned_window = -1

    def run(
        self,
        inputs: Any,
        duration: Optional[float] = None,
        windows: Optional[Sequence[Tuple[int, int]]] = None,
        record_events: Optional[Sequence[int]] = None,
    ) -> SpikeRecord:
        self._source = inputs
        self._windows = list(windows) if windows is not None else []
        return super().run(inputs, duration, windows, record_events)

    def begin_run(self, instances: int, steps: int) -> None:
        run, chunk = self.run_index, self._chunks
        self._chunks += 1
        self.rng = self.dev._stream(_NOISE, run, self.slot, chunk)
        self._loss_rng = self.dev._stream(_LOSS, run, self.slot, chunk)
        burst = max(1.0, self._per_step(self.profile.neuron_rate_cap))
        self._out_tokens = {
            layer: np.full((instances, n), burst)
            for layer, n in enumerate(self.net.layers)
            if layer > 0
        }
        windows = self._windows or [(0, steps)]
        self._window_of = np.full(steps, -1, dtype=np.int64)
        for w, (start, stop) in enumerate(windows):
            self._window_of[start:stop] = w
        self._windows = windows
        self._thinned, self._thinned_window = None, -1

    def _per_step(self, cap: Optional[float]) -> float:
        return 0.0 if cap is None else cap * self.net.dt / 1000.0

    def _trial_factors(
        self, layer: int, neurons: int
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Independent ``(tau_m, threshold distance)`` jitter of this run."""
        if layer not in self._trial:
            rng = self.dev._stream(_TRIAL, self.run_index, self.slot, layer)
            cv = self.profile.trial_noise_cv
            tau = lognormal_unit_mean(rng, cv, neurons)
            thresh = lognormal_unit_mean(rng, cv, neurons)
            self._trial[layer] = (tau, thresh)
        return self._trial[layer]

    def population_params(self, layer: int, instances: int) -> PopulationParams:
        lif = self.net.lif[layer - 1]
        if self.profile.mismatch_cv == 0 and self.profile.trial_noise_cv == 0:
            return PopulationParams.from_lif(lif)
        n = self.net.layers[layer]
        tau, thresh = self.dev.mismatch(self.slot, layer, n)
        trial_tau, trial_thresh = self._trial_factors(layer, n)
        return PopulationParams.from_lif(lif, tau * trial_tau, thresh * trial_thresh)

    def membrane_noise(self, layer: int) -> float:
        return self.profile.membrane_noise_sigma

    def _thin_window(self, w: int) -> np.ndarray:
        """Uniformly thin one counting window down to the input bandwidth."""
        start, stop = self._windows[w]
        block = np.stack([np.asarray(self._source[s]) for s in range(start, stop)])
        window_ms = (stop - start) * self.net.dt
        allowed = int(np.floor(self.profile.input_bw_cap * window_ms / 1000.0))
        out = block.astype(np.float64)
        for row in range(block.shape[1]):
            counts = block[:, row].astype(np.int64).ravel()
            if counts.sum() <= allowed:
                continue
            units = np.repeat(np.arange(counts.size), counts)
            keep = self._loss_rng.choice(units, size=allowed, replace=False)
            kept = np.bincount(keep, minlength=counts.size)
            out[:, row] = kept.reshape(block.shape[0], -1)
        return out

    def filter_input(self, spikes: np.ndarray, t: int) -> np.ndarray:
        if self.profile.input_bw_cap is None or t >= len(self._window_of):
            return spikes
        w = int(self._window_of[t])
        if w < 0:
            return spikes
        if w != self._thinned_window:
            self._thinned, self._thinned_window = self._thin_window(w), w
        start = self._windows[w][0]
        return self._thinned[t - start]

    def filter_output(self, layer: int, spikes: np.ndarray, t: int) -> np.ndarray:
        cap = self.profile.neuron_rate_cap
        if cap is None:
            return spikes
        tokens = self._out_tokens[layer]
        per_step = self._per_step(cap)
        np.minimum(tokens + per_step, max(1.0, per_step), out=tokens)
        passed = spikes & (tokens >= 1.0)
        tokens -= passed
        return passed


def device_network(net: SnnNetwork, profile: HardwareProfile) -> SnnNetwork:
    """Copy of ``net`` with weights on the device grid and prescribed LIF values."""
    weights = net.weights
    if profile.weight_levels is not None:
        if not any(w.size for w in weights):
            raise ShapeError("cannot quantize a network without weights")
        peak = max((float(np.max(np.abs(w))) for w in weights if w.size), default=0.0)
        if peak > 0.0:
            weights = [quantize(w, peak, profile.weight_levels) for w in weights]
    lif: List[LifParams] = list(net.lif)
    if profile.lif_overrides:
        try:
            overrides = profile.lif_overrides
            lif = [LifParams(**{**p.model_dump(), **overrides}) for p in lif]
        except ValueError as e:
            raise ProfileConfigError(
                f"invalid lif_overrides in {profile.name}: {e}"
            ) from e
    return SnnNetwork(list(net.layers), weights, lif, net.dt, net.recorded)


def run_on_device(
    dev: DeviceInstance,
    net: SnnNetwork,
    batch,
    cfg: ConversionConfig,
    batch_size: Optional[int] = None,
    record_layers: bool = False,
) -> Tuple[ClassifiedBatch, RunStats]:
    """
    Classify a batch the way ``classify`` does, but on an emulated device.

    Weights are put on the profile's level grid, neuron parameters carry the
    device's frozen mismatch re-jittered by this run's trial variation and
    membranes receive white noise. Input spikes above the bandwidth cap are
    thinned at random per presentation and output spikes above the
    per-neuron rate cap are lost. Devices that cannot reset present samples
    back to back separated by ``cfg.t_gap``.

    Args:
        dev: device instance; runs on it are serialized
        net: converted network
        batch: Dataset or image array
        cfg: presentation settings
        batch_size: samples per batch, drives the instance plan
        record_layers: keep per-sample spike counts of every layer

    Returns:
        (classification, run statistics)

    Raises:
        CapacityError: the network does not fit the device
        ProfileConfigError: ``cfg.weight_levels`` contradicts the profile
    """
    profile = dev.profile
    if (
        cfg.weight_levels is not None
        and profile.weight_levels is not None
        and cfg.weight_levels != profile.weight_levels
    ):
        raise ProfileConfigError(
            f"conversion uses {cfg.weight_levels} weight levels but {profile.name} "
            f"provides {profile.weight_levels}"
        )

    images = np.asarray(getattr(batch, "images", batch), dtype=np.float64)
    labels = getattr(batch, "labels", None)
    plan = schedule(len(images), net.neuron_count, profile, batch_size)
    hw_net = device_network(net, profile)
    run_cfg = cfg
    if not profile.resets_between_samples and cfg.reset_between_samples:
        run_cfg = cfg.model_copy(update={"reset_between_samples": False})

    with dev.lock:
        run_index = dev.runs
        dev.runs += 1
        parts = []
        for slot, (start, stop) in enumerate(plan.ranges):
            sim = DeviceSimulator(hw_net, dev, run_index, slot)
            part = classify(
                hw_net,
                images[start:stop],
                run_cfg,
                simulator=sim,
                record_layers=record_layers,
                lanes=1,
                first_sample=start,
            )
            if labels is not None:
                part.labels = np.asarray(labels)[start:stop]
            parts.append(part)

    if parts:
        result = ClassifiedBatch.concatenate(parts)
    else:
        result = ClassifiedBatch.from_counts(
            np.zeros((0, net.layers[-1])),
            None if labels is None else np.zeros(0, dtype=np.int64),
        )

    n_layers = len(net.layers)
    spike_stats = result.stats or SpikeStats([0] * n_layers, [0] * n_layers)
    stats = RunStats(
        profile=profile.name,
        n_samples=len(images),
        model_time_ms=len(images) * cfg.period,
        wall_clock_ms=plan.wall_clock_ms(profile, cfg.period),
        presynaptic_events=spike_stats.presynaptic_events,
        synaptic_events=spike_stats.synaptic_events,
        generated=list(spike_stats.generated),
        delivered=list(spike_stats.delivered),
        plan=plan,
        device_seed=dev.seed,
        run_index=run_index,
    )
    record_device_run(len(images), sum(stats.dropped))
    logger.debug(
        f"Device run {run_index} on {profile.name}: {len(images)} samples, "
        f"{plan.instances} instances, dropped {stats.dropped}"
    )
    return result, stats
