"""
snnbench - Rate Coding
Pixel intensities to spike trains and spike counts back to intensities.
"""

from typing import List, Optional, Union

import numpy as np

from ..snn.network import SpikeRecord
from ..snn.trains import n_steps, poisson_raster, regular_raster, regular_train
from .config import ConversionConfig


def _sample_rng(cfg: ConversionConfig, sample: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([cfg.seed, sample]))


def encode(x: np.ndarray, cfg: ConversionConfig, sample: int = 0) -> List[np.ndarray]:
    """
    One spike train per pixel at ``p * f_max`` for ``t_present`` ms.

    Regular trains start at 0 and carry ``floor(p * f_max * t_present / 1000)``
    spikes. In Poisson mode the train is drawn from a stream seeded by
    ``(cfg.seed, sample)``.
    """
    x = np.clip(np.asarray(x, dtype=np.float64).ravel(), 0.0, 1.0)
    if cfg.input_mode == "regular":
        return [regular_train(p * cfg.f_max, cfg.t_present) for p in x]
    rng = _sample_rng(cfg, sample)
    raster = poisson_raster(x[None, :] * cfg.f_max, cfg.t_present, cfg.dt, rng)
    return [np.nonzero(raster[:, 0, i])[0] * cfg.dt for i in range(len(x))]


def encode_batch(
    images: np.ndarray, cfg: ConversionConfig, first_sample: int = 0
) -> np.ndarray:
    """
    Count raster ``(present_steps, samples, pixels)`` for a batch of images.

    Poisson rows use the per-sample stream of ``encode`` so results do not
    depend on how samples are grouped into batches.
    """
    rates = np.clip(np.asarray(images, dtype=np.float64), 0.0, 1.0) * cfg.f_max
    if cfg.input_mode == "regular":
        return regular_raster(rates, cfg.t_present, cfg.dt)
    steps = n_steps(cfg.t_present, cfg.dt)
    raster = np.zeros((steps,) + rates.shape, dtype=np.uint8)
    for row in range(len(rates)):
        rng = _sample_rng(cfg, first_sample + row)
        raster[:, row : row + 1] = poisson_raster(
            rates[row : row + 1], cfg.t_present, cfg.dt, rng
        )
    return raster


def decode(
    record: Union[SpikeRecord, np.ndarray],
    cfg: ConversionConfig,
    layer: int = 0,
    window: int = 0,
) -> np.ndarray:
    """
    Spike counts divided by the full-scale count, clipped to [0, 1].

    Accepts a SpikeRecord (counts of ``layer`` in ``window``) or a raw
    count array.
    """
    if isinstance(record, SpikeRecord):
        counts = record.layer_counts(layer, window)
    else:
        counts = np.asarray(record)
    return np.clip(counts / cfg.full_scale_count, 0.0, 1.0)


def round_trip(x: np.ndarray, cfg: ConversionConfig, sample: int = 0) -> np.ndarray:
    """
    Encode an image, count the input-layer spikes and decode them again.

    The per-pixel error of regular coding is below ``1000 / (f_max * t_present)``.
    """
    x = np.asarray(x, dtype=np.float64)
    raster = encode_batch(x.reshape(1, -1), cfg, first_sample=sample)
    record = SpikeRecord(
        dt=cfg.dt,
        steps=len(raster),
        counts={0: raster.sum(axis=0, dtype=np.int64)[None]},
    )
    return decode(record, cfg)[0].reshape(x.shape)


def reconstruction_error(
    images: np.ndarray, cfg: ConversionConfig, shape: Optional[tuple] = None
) -> np.ndarray:
    """Absolute per-pixel round-trip error for every image, plot-ready."""
    images = np.asarray(images, dtype=np.float64)
    decoded = np.stack([round_trip(x, cfg, i) for i, x in enumerate(images)])
    error = np.abs(decoded - images)
    return error.reshape((len(images),) + shape) if shape else error
