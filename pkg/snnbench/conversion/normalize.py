"""
snnbench - Weight Normalization
Global max-abs scaling of ANN weights and level quantization.
"""

from typing import List, Optional

import numpy as np

from ..ann.model import AnnModel
from ..exceptions import DegenerateModelError
from .config import ConversionConfig


def quantize(weights: np.ndarray, w_max: float, levels: int) -> np.ndarray:
    """
    Round magnitudes to ``levels`` equally spaced values in ``[0, w_max]``.

    The sign is kept, so signed weights land on a grid symmetric around 0.
    Halfway values round away from zero.

    Example:
        >>> quantize(np.array([15.0, 7.5, 3.75]), 15.0, 16)
        array([15.,  8.,  4.])
    """
    step = w_max / (levels - 1)
    magnitude = np.floor(np.abs(weights) / step + 0.5) * step
    return np.sign(weights) * np.minimum(magnitude, w_max)


def normalize_weights(
    model: AnnModel,
    cfg: ConversionConfig,
    levels: Optional[int] = None,
) -> List[np.ndarray]:
    """
    Scale all weights by one network-wide factor so that max |w| == w_max.

    Args:
        model: trained bias-free network
        cfg: conversion settings (``w_max``, ``weight_levels``)
        levels: quantization level count overriding ``cfg.weight_levels``

    Returns:
        One ``(out, in)`` matrix per projection

    Raises:
        DegenerateModelError: when every weight is zero
    """
    peak = max(float(np.max(np.abs(w))) if w.size else 0.0 for w in model.weights)
    if peak == 0.0 or not np.isfinite(peak):
        raise DegenerateModelError("cannot normalize a model without nonzero weights")

    scaled = [w * (cfg.w_max / peak) for w in model.weights]
    levels = levels if levels is not None else cfg.weight_levels
    if levels is None:
        return scaled
    return [quantize(w, cfg.w_max, levels) for w in scaled]

