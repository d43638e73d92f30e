"""
snnbench - Clock-Driven LIF Simulator
Batched exponential-Euler integration of IF_cond_exp populations.

State arrays are shaped ``(instances, neurons)``. Every row is an independent
copy of the network, which is how per-sample resets and parallel instances of
one network are expressed.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import NumericalError, ShapeError
from ..metrics import record_simulation
from .network import SnnNetwork, SpikeRecord, SpikeStats, stack_events
from .params import LifParams
from .trains import n_steps, trains_to_raster

logger = logging.getLogger("snnbench")

ArrayOrFloat = Union[float, np.ndarray]
Window = Tuple[int, int]

_REFRAC_EPS = 1e-9


@dataclass
class PopulationParams:
    """
    LIF constants of one population, possibly per neuron.

    ``tau_m`` and ``v_thresh`` may be arrays broadcastable to
    ``(instances, neurons)``; everything else is shared.
    """

    cm: float
    tau_m: ArrayOrFloat
    tau_syn_e: float
    tau_syn_i: float
    v_rest: float
    v_reset: float
    v_thresh: ArrayOrFloat
    e_rev_e: float
    e_rev_i: float
    t_refrac: float

    @classmethod
    def from_lif(
        cls,
        lif: LifParams,
        tau_m_factor: Optional[np.ndarray] = None,
        thresh_factor: Optional[np.ndarray] = None,
    ) -> "PopulationParams":
        """
        Nominal parameters, optionally scaled per neuron.

        ``thresh_factor`` scales the threshold distance above rest, so a
        factor of 1 keeps ``v_thresh`` and the threshold never drops to rest.
        """
        tau_m: ArrayOrFloat = lif.tau_m
        v_thresh: ArrayOrFloat = lif.v_thresh
        if tau_m_factor is not None:
            tau_m = lif.tau_m * np.asarray(tau_m_factor, dtype=np.float64)
        if thresh_factor is not None:
            distance = lif.v_thresh - lif.v_rest
            factor = np.asarray(thresh_factor, dtype=np.float64)
            v_thresh = lif.v_rest + distance * factor
        return cls(
            cm=lif.cm,
            tau_m=tau_m,
            tau_syn_e=lif.tau_syn_e,
            tau_syn_i=lif.tau_syn_i,
            v_rest=lif.v_rest,
            v_reset=lif.v_reset,
            v_thresh=v_thresh,
            e_rev_e=lif.e_rev_e,
            e_rev_i=lif.e_rev_i,
            t_refrac=lif.t_refrac,
        )


@dataclass
class PopulationState:
    """Membrane potential, conductances (µS) and remaining refractory time (ms)."""

    v: np.ndarray
    g_e: np.ndarray
    g_i: np.ndarray
    refrac: np.ndarray

    @classmethod
    def resting(cls, instances: int, neurons: int, v_rest: float) -> "PopulationState":
        shape = (instances, neurons)
        return cls(
            np.full(shape, v_rest, dtype=np.float64),
            np.zeros(shape),
            np.zeros(shape),
            np.zeros(shape),
        )


def _decay(tau: float, dt: float) -> float:
    return float(np.exp(-dt / tau))


def _step_average(tau: float, dt: float) -> float:
    """Mean of an exponentially decaying conductance over one step."""
    return float((tau / dt) * (1.0 - np.exp(-dt / tau)))


def _check_finite(state: PopulationState, layer: int) -> None:
    for arr in (state.v, state.g_e, state.g_i):
        bad = ~np.isfinite(arr)
        if bad.any():
            neuron = int(np.argwhere(bad)[0][-1])
            raise NumericalError("non-finite neuron state", layer, neuron)


def step(
    state: PopulationState,
    g_exc_in: np.ndarray,
    g_inh_in: np.ndarray,
    params: PopulationParams,
    dt: float,
    layer: int = 1,
    noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Advance one population by ``dt`` in place.

    Arriving conductance is added first, the membrane then relaxes towards
    the conductance-weighted reversal potential with the conductances held at
    their step average, and the conductances decay. Neurons in their
    refractory period are clamped to ``v_reset``; a spike clamps the next
    ``ceil(t_refrac / dt)`` steps, so intervals are at least ``t_refrac + dt``.

    Args:
        state: population state, updated in place
        g_exc_in: excitatory conductance arriving this step (µS)
        g_inh_in: inhibitory conductance arriving this step (µS)
        params: population constants
        dt: time step in ms
        layer: population index used in error messages
        noise: optional membrane noise in mV added to non-refractory neurons

    Returns:
        Boolean spike array of the step

    Raises:
        NumericalError: when the state is or becomes non-finite
    """
    _check_finite(state, layer)

    state.g_e += g_exc_in
    state.g_i += g_inh_in

    g_e = state.g_e * _step_average(params.tau_syn_e, dt)
    g_i = state.g_i * _step_average(params.tau_syn_i, dt)
    g_leak = params.cm / params.tau_m
    g_total = g_leak + g_e + g_i
    drive = g_leak * params.v_rest + g_e * params.e_rev_e + g_i * params.e_rev_i
    v_inf = drive / g_total
    v_new = v_inf + (state.v - v_inf) * np.exp(-dt * g_total / params.cm)
    if noise is not None:
        v_new = v_new + noise

    refractory = state.refrac > _REFRAC_EPS
    state.v = np.where(refractory, params.v_reset, v_new)
    state.refrac = np.maximum(state.refrac - dt, 0.0)

    state.g_e *= _decay(params.tau_syn_e, dt)
    state.g_i *= _decay(params.tau_syn_i, dt)

    _check_finite(state, layer)

    spikes = (state.v >= params.v_thresh) & ~refractory
    state.v = np.where(spikes, params.v_reset, state.v)
    state.refrac = np.where(spikes, params.t_refrac, state.refrac)
    return spikes


def _as_raster(
    inputs: Union[np.ndarray, Sequence[np.ndarray]],
    duration: Optional[float],
    dt: float,
) -> np.ndarray:
    if getattr(inputs, "ndim", None) == 3:
        raster = inputs
        if not isinstance(raster, np.ndarray):
            # lazily generated rasters define their own length
            return raster
    else:
        if duration is None:
            raise ValueError("duration is required when spike trains are given")
        raster = trains_to_raster(list(inputs), duration, dt)
    if duration is None:
        return raster
    steps = n_steps(duration, dt)
    if steps <= len(raster):
        return raster[:steps]
    pad = np.zeros((steps - len(raster),) + raster.shape[1:], dtype=raster.dtype)
    return np.concatenate([raster, pad])


class Simulator:
    """
    Runs an ``SnnNetwork`` on batched input rasters.

    Subclasses change device behaviour through the hook methods
    ``population_params``, ``membrane_noise``, ``filter_input`` and
    ``filter_output``; the integration loop stays the same.
    """

    def __init__(self, net: SnnNetwork, seed: int = 0):
        self.net = net
        self.rng = np.random.default_rng(seed)
        self._exc = [np.maximum(w, 0.0) for w in net.weights]
        self._inh = [np.maximum(-w, 0.0) for w in net.weights]
        self._fan_out = [np.count_nonzero(w, axis=0) for w in net.weights]

    # hooks ---------------------------------------------------------------

    def population_params(self, layer: int, instances: int) -> PopulationParams:
        return PopulationParams.from_lif(self.net.lif[layer - 1])

    def membrane_noise(self, layer: int) -> float:
        """Noise standard deviation in mV per sqrt(ms)."""
        return 0.0

    def filter_input(self, spikes: np.ndarray, t: int) -> np.ndarray:
        return spikes

    def filter_output(self, layer: int, spikes: np.ndarray, t: int) -> np.ndarray:
        return spikes

    def begin_run(self, instances: int, steps: int) -> None:
        """Called once before the first step of every run."""

    # ---------------------------------------------------------------------

    def run(
        self,
        inputs: Union[np.ndarray, Sequence[np.ndarray]],
        duration: Optional[float] = None,
        windows: Optional[Sequence[Window]] = None,
        record_events: Optional[Sequence[int]] = None,
    ) -> SpikeRecord:
        """
        Simulate the network.

        Args:
            inputs: count raster ``(steps, instances, sources)`` or one spike
                time array per source (single instance)
            duration: simulated time in ms; pads or truncates the raster
            windows: non-overlapping ``(start_step, stop_step)`` counting
                windows, defaults to the whole run
            record_events: layers whose individual spikes are kept,
                defaults to ``net.recorded``; ``()`` disables recording

        Returns:
            SpikeRecord with window counts for every layer
        """
        net = self.net
        dt = net.dt
        raster = _as_raster(inputs, duration, dt)
        steps, instances, sources = raster.shape
        if sources != net.layers[0]:
            raise ShapeError(
                f"{sources} input sources for an input layer of {net.layers[0]}"
            )

        windows = list(windows) if windows is not None else [(0, steps)]
        window_of = np.full(steps, -1, dtype=np.int64)
        for w, (start, stop) in enumerate(windows):
            window_of[start:stop] = w
        recorded = tuple(net.recorded if record_events is None else record_events)

        n_layers = len(net.layers)
        counts = {
            layer: np.zeros((len(windows), instances, n), dtype=np.int64)
            for layer, n in enumerate(net.layers)
        }
        chunks: Dict[int, List[Tuple[int, np.ndarray]]] = {
            layer: [] for layer in recorded
        }
        generated = [0] * n_layers
        delivered = [0] * n_layers
        presynaptic = 0
        synaptic = 0

        self.begin_run(instances, steps)
        params = [None] + [
            self.population_params(layer, instances) for layer in range(1, n_layers)
        ]
        states = [None] + [
            PopulationState.resting(instances, net.layers[layer], params[layer].v_rest)
            for layer in range(1, n_layers)
        ]
        noise_scale = [0.0] + [
            self.membrane_noise(layer) * np.sqrt(dt) for layer in range(1, n_layers)
        ]
        previous: List[np.ndarray] = [
            np.zeros((instances, n)) for n in net.layers
        ]

        for t in range(steps):
            raw = raster[t].astype(np.float64)
            generated[0] += int(raw.sum())
            current: List[np.ndarray] = [self.filter_input(raw, t)]

            for layer in range(1, n_layers):
                # input spikes arrive in the same step, all others one step later
                pre = current[0] if layer == 1 else previous[layer - 1]
                g_exc = pre @ self._exc[layer - 1].T
                g_inh = pre @ self._inh[layer - 1].T
                noise = None
                if noise_scale[layer] > 0:
                    noise = noise_scale[layer] * self.rng.standard_normal(
                        (instances, net.layers[layer])
                    )
                fired = step(
                    states[layer], g_exc, g_inh, params[layer], dt, layer, noise
                )
                generated[layer] += int(fired.sum())
                current.append(self.filter_output(layer, fired, t).astype(np.float64))

            w = window_of[t]
            for layer in range(n_layers):
                spikes = current[layer]
                total = int(spikes.sum())
                delivered[layer] += total
                if layer < n_layers - 1 and total:
                    presynaptic += total
                    synaptic += int(spikes.sum(axis=0) @ self._fan_out[layer])
                if w >= 0:
                    counts[layer][w] += spikes.astype(np.int64)
                if layer in chunks and total:
                    chunks[layer].append((t, np.nonzero(spikes)))
            previous = current

        record_simulation(steps, instances)
        return SpikeRecord(
            dt=dt,
            steps=steps,
            counts=counts,
            events={layer: stack_events(chunks[layer]) for layer in recorded},
            stats=SpikeStats(generated, delivered, presynaptic, synaptic),
        )


def run(
    net: SnnNetwork,
    inputs: Union[np.ndarray, Sequence[np.ndarray]],
    duration: float,
    record: Optional[Sequence[int]] = None,
) -> SpikeRecord:
    """
    Simulate ``net`` on nominal parameters.

    Example:
        >>> record = run(net, [regular_train(50.0, 1000.0)], 1000.0)
        >>> record.spike_times(1, 0)
    """
    return Simulator(net).run(inputs, duration, record_events=record)
