"""
snnbench - Spike Trains
Regular and Poisson spike sources and their conversion to step rasters.
"""

from typing import List, Optional, Sequence

import numpy as np

# guards floor() against 5.9999... for products that are exact integers
_ROUNDING_SLACK = 1e-9


def regular_train(rate_hz: float, duration_ms: float) -> np.ndarray:
    """Evenly spaced spike times (ms) starting at 0, floor(rate*T) spikes."""
    if rate_hz <= 0 or duration_ms <= 0:
        return np.zeros(0)
    count = int(np.floor(rate_hz * duration_ms / 1000.0 + _ROUNDING_SLACK))
    return np.arange(count) * (1000.0 / rate_hz)


def n_steps(duration_ms: float, dt: float) -> int:
    return int(round(duration_ms / dt))


def trains_to_raster(
    trains: Sequence[np.ndarray], duration_ms: float, dt: float
) -> np.ndarray:
    """Bin per-source spike times into a (steps, 1, sources) count raster."""
    steps = n_steps(duration_ms, dt)
    raster = np.zeros((steps, 1, len(trains)), dtype=np.uint8)
    for source, times in enumerate(trains):
        idx = np.floor(np.asarray(times) / dt + _ROUNDING_SLACK).astype(np.int64)
        idx = idx[(idx >= 0) & (idx < steps)]
        np.add.at(raster[:, 0, source], idx, 1)
    return raster


def regular_raster(rates_hz: np.ndarray, duration_ms: float, dt: float) -> np.ndarray:
    """
    Count raster (steps, rows, sources) of regular trains for a rate matrix.

    Every entry of ``rates_hz`` (rows x sources) produces the same spikes as
    ``regular_train``.
    """
    rates = np.asarray(rates_hz, dtype=np.float64)
    steps = n_steps(duration_ms, dt)
    raster = np.zeros((steps,) + rates.shape, dtype=np.uint8)
    if steps == 0 or not np.any(rates > 0):
        return raster

    counts = np.floor(rates * duration_ms / 1000.0 + _ROUNDING_SLACK).astype(np.int64)
    max_count = int(counts.max())
    if max_count == 0:
        return raster

    k = np.arange(max_count).reshape(-1, 1, 1)
    valid = k < counts[None]
    with np.errstate(divide="ignore", invalid="ignore"):
        isi = np.where(rates > 0, 1000.0 / rates, np.inf)
        times = k * isi[None]
    step_idx = np.floor(times[valid] / dt + _ROUNDING_SLACK).astype(np.int64)
    _, rows, sources = np.nonzero(valid)
    keep = step_idx < steps
    np.add.at(raster, (step_idx[keep], rows[keep], sources[keep]), 1)
    return raster


def poisson_raster(
    rates_hz: np.ndarray,
    duration_ms: float,
    dt: float,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Bernoulli-per-step approximation of Poisson trains, seeded via ``rng``."""
    rng = rng or np.random.default_rng(0)
    rates = np.asarray(rates_hz, dtype=np.float64)
    steps = n_steps(duration_ms, dt)
    p = np.clip(rates * dt / 1000.0, 0.0, 1.0)
    return (rng.random((steps,) + rates.shape) < p[None]).astype(np.uint8)


def raster_to_trains(raster: np.ndarray, dt: float, row: int = 0) -> List[np.ndarray]:
    """Spike times (ms) per source of one raster row."""
    trains = []
    for source in range(raster.shape[2]):
        steps = np.nonzero(raster[:, row, source])[0]
        counts = raster[steps, row, source]
        trains.append(np.repeat(steps * dt, counts).astype(np.float64))
    return trains
