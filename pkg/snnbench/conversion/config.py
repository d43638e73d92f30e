"""
snnbench - Conversion Settings
Parameters of the ANN to SNN mapping and the rate-coded presentation.
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ConversionConfig(BaseModel):
    """
    How a trained network becomes a spiking one and how samples are shown.

    ``w_max`` is the largest synaptic weight after normalization (µS on
    simulators, or the top digital level when weights are integer levels).
    ``weight_levels`` switches on quantization to that many equally spaced
    magnitudes in ``[0, w_max]``.

    Example:
        >>> cfg = ConversionConfig(w_max=15, weight_levels=16)
        >>> cfg.samples_per_second
        5.0
    """

    w_max: float = Field(default=0.01, gt=0)
    f_max: float = Field(default=60.0, gt=0)
    t_present: float = Field(default=200.0, gt=0)
    t_gap: float = Field(default=0.0, ge=0)
    weight_levels: Optional[int] = Field(default=None, ge=2)
    reset_between_samples: bool = True
    input_mode: Literal["regular", "poisson"] = "regular"
    dt: float = Field(default=1.0, gt=0)
    seed: int = 0

    @property
    def period(self) -> float:
        """Time one sample occupies: presentation plus gap (ms)."""
        return self.t_present + self.t_gap

    @property
    def samples_per_second(self) -> float:
        return 1000.0 / self.period

    @property
    def full_scale_count(self) -> float:
        """Spike count of a pixel at intensity 1.0 over the presentation."""
        return self.f_max * self.t_present / 1000.0
