"""ANN to SNN conversion, rate coding and spike-count classification."""

from .coding import decode, encode, encode_batch, reconstruction_error, round_trip
from .config import ConversionConfig
from .convert import ClassifiedBatch, LaneRaster, classify, convert
from .normalize import normalize_weights, quantize

__all__ = [
    "ClassifiedBatch",
    "ConversionConfig",
    "LaneRaster",
    "classify",
    "convert",
    "decode",
    "encode",
    "encode_batch",
    "normalize_weights",
    "quantize",
    "reconstruction_error",
    "round_trip",
]
