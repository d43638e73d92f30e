"""
snnbench - Hardware Profiles
Declarative device models loaded from JSON presets.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..exceptions import ProfileConfigError

logger = logging.getLogger("snnbench")

PRESET_DIR = Path(__file__).parent / "presets"


class MeteredEnergy(BaseModel):
    """Energy from a measured active power draw over the wall-clock time."""

    kind: Literal["metered"] = "metered"
    active_power_w: float = Field(ge=0)


class EventEnergy(BaseModel):
    """Energy from presynaptic event counts plus idle power."""

    kind: Literal["event_based"] = "event_based"
    joules_per_event: float = Field(ge=0)
    idle_power_w: float = Field(default=0.0, ge=0)


class Capacity(BaseModel):
    """Device size; ``None`` means unlimited."""

    neurons: Optional[int] = Field(default=None, gt=0)
    instance_neurons: Optional[int] = Field(default=None, gt=0)
    max_instances: Optional[int] = Field(default=None, gt=0)

    @property
    def per_instance(self) -> Optional[int]:
        """Largest network one instance may hold."""
        if self.instance_neurons is not None:
            return self.instance_neurons
        return self.neurons


class HardwareProfile(BaseModel):
    """
    Everything that distinguishes a platform from the ideal simulator.

    Caps and levels set to ``None`` (``null`` in JSON) are unlimited.
    ``reference`` keeps published figures for comparison only; nothing
    reads it during a run.
    """

    model_config = ConfigDict(extra="forbid")

    name: str
    description: str = ""
    weight_levels: Optional[int] = Field(default=None, ge=2)
    mismatch_cv: float = Field(default=0.0, ge=0)
    trial_noise_cv: float = Field(default=0.0, ge=0)
    membrane_noise_sigma: float = Field(default=0.0, ge=0)
    input_bw_cap: Optional[float] = Field(default=None, gt=0)
    neuron_rate_cap: Optional[float] = Field(default=None, gt=0)
    speedup: float = Field(default=1.0, gt=0)
    batch_overhead_ms: float = Field(default=0.0, ge=0)
    resets_between_samples: bool = True
    capacity: Capacity = Field(default_factory=Capacity)
    energy_model: Union[MeteredEnergy, EventEnergy] = Field(
        default_factory=lambda: MeteredEnergy(active_power_w=0.0), discriminator="kind"
    )
    lif_overrides: Dict[str, float] = Field(default_factory=dict)
    reference: Dict[str, Any] = Field(default_factory=dict)

    @property
    def is_ideal(self) -> bool:
        """True when a run is indistinguishable from the nominal simulator."""
        return (
            self.weight_levels is None
            and self.mismatch_cv == 0
            and self.trial_noise_cv == 0
            and self.membrane_noise_sigma == 0
            and self.input_bw_cap is None
            and self.neuron_rate_cap is None
            and not self.lif_overrides
            and self.resets_between_samples
        )

    def with_overrides(self, overrides: Dict[str, Any]) -> "HardwareProfile":
        """Validated copy with some fields replaced."""
        data = self.model_dump()
        for key, value in overrides.items():
            if key in ("capacity", "energy_model") and isinstance(value, dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        try:
            return HardwareProfile.model_validate(data)
        except ValidationError as e:
            raise ProfileConfigError(
                f"invalid override for profile {self.name}: {e}"
            ) from e


def list_presets() -> List[str]:
    return sorted(p.stem for p in PRESET_DIR.glob("*.json"))


def load_profile(
    name_or_path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None
) -> HardwareProfile:
    """
    Load a preset by name or a profile JSON file by path.

    Example:
        >>> load_profile("spikey").weight_levels
        16

    Raises:
        ProfileConfigError: unknown name, unreadable file or invalid content
    """
    path = Path(name_or_path)
    if not (path.suffix == ".json" and path.exists()):
        path = PRESET_DIR / f"{name_or_path}.json"
    if not path.exists():
        raise ProfileConfigError(
            f"unknown profile {name_or_path!r}; presets: {', '.join(list_presets())}"
        )
    try:
        profile = HardwareProfile.model_validate(json.loads(path.read_text()))
    except (ValueError, ValidationError) as e:
        raise ProfileConfigError(f"invalid profile {path}: {e}") from e
    logger.debug(f"Loaded hardware profile {profile.name} from {path}")
    return profile.with_overrides(overrides) if overrides else profile
