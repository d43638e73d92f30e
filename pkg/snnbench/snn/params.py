"""
snnbench - Neuron Parameters
Conductance-based leaky integrate-and-fire parameter set (IF_cond_exp).
"""

from pydantic import BaseModel, ConfigDict, Field, model_validator


class LifParams(BaseModel):
    """
    IF_cond_exp parameters in PyNN units: nF, ms, mV.

    Example:
        >>> LifParams(tau_m=10.0).leak_conductance
        0.02
    """

    model_config = ConfigDict(frozen=True)

    cm: float = Field(default=0.2, gt=0)
    tau_m: float = Field(default=20.0, gt=0)
    tau_syn_e: float = Field(default=5.0, gt=0)
    tau_syn_i: float = Field(default=5.0, gt=0)
    v_rest: float = -65.0
    v_reset: float = -65.0
    v_thresh: float = -50.0
    e_rev_e: float = 0.0
    e_rev_i: float = -90.0
    t_refrac: float = Field(default=1.0, ge=0)

    @model_validator(mode="after")
    def _check_potentials(self) -> "LifParams":
        if self.v_thresh <= self.v_reset:
            raise ValueError("v_thresh must lie above v_reset")
        if self.e_rev_e <= self.v_thresh:
            raise ValueError("e_rev_e must lie above v_thresh")
        if self.e_rev_i > self.v_rest:
            raise ValueError("e_rev_i must not lie above v_rest")
        return self

    @property
    def leak_conductance(self) -> float:
        """Leak conductance in µS (cm / tau_m)."""
        return self.cm / self.tau_m
