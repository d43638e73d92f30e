"""
snnbench - Energy Models
Energy per inference from metered power or presynaptic event counts.
"""

from ..exceptions import EnergyModelError
from .profiles import EventEnergy, HardwareProfile, MeteredEnergy


def estimate_energy(stats, profile: HardwareProfile) -> float:
    """
    Joules per inference for a finished run.

    Metered: ``P * wall_clock / n``. Event based:
    ``events * e_event / n + P_idle * wall_clock / n``.

    Example:
        >>> # 10 W for 5.07 s over 5000 samples
        >>> round(estimate_energy(stats, profile) * 1e3, 2)
        10.14

    Raises:
        EnergyModelError: the run classified no samples
    """
    if stats.n_samples <= 0:
        raise EnergyModelError("energy per inference needs at least one sample")
    seconds = stats.wall_clock_ms / 1000.0
    model = profile.energy_model
    if isinstance(model, MeteredEnergy):
        return model.active_power_w * seconds / stats.n_samples
    if isinstance(model, EventEnergy):
        events = stats.presynaptic_events * model.joules_per_event
        return (events + model.idle_power_w * seconds) / stats.n_samples
    raise EnergyModelError(f"unsupported energy model {model!r}")
