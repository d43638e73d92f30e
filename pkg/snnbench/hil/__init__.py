"""Hardware-in-the-loop retraining."""

from .retrain import (
    HilConfig,
    HilEpoch,
    HilResult,
    calibrate_rate_normalizer,
    device_accuracy,
    hil_train,
    recorded_rates,
    substituted_pass,
)

__all__ = [
    "HilConfig",
    "HilEpoch",
    "HilResult",
    "calibrate_rate_normalizer",
    "device_accuracy",
    "hil_train",
    "recorded_rates",
    "substituted_pass",
]
