"""
snnbench - Experiment Specifications
JSON-described experiments and dotted-path parameter sweeps.
"""

import itertools
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from ..conversion.config import ConversionConfig
from ..exceptions import ExperimentError
from ..hil.retrain import HilConfig
from ..snn.params import LifParams

SWEEP_ROOTS = ("conversion", "lif", "profile", "hil", "batch_size", "n_samples")


class SweepAxis(BaseModel):
    """One swept parameter, e.g. ``conversion.f_max`` over ``[10, 40]``."""

    path: str
    values: List[Any]

    @field_validator("values")
    @classmethod
    def _non_empty(cls, values: List[Any]) -> List[Any]:
        if not values:
            raise ValueError("a sweep axis needs at least one value")
        return values

    @field_validator("path")
    @classmethod
    def _known_root(cls, path: str) -> str:
        if path.split(".", 1)[0] not in SWEEP_ROOTS:
            roots = ", ".join(SWEEP_ROOTS)
            raise ValueError(f"sweep path {path!r} must start with one of {roots}")
        return path


class ExperimentSpec(BaseModel):
    """
    One experiment: a network on a platform, optionally swept.

    ``network`` is a preset name (see ``NETWORK_PRESETS``), a model file or
    a genome JSON file. ``platform`` is a hardware preset name or a profile
    JSON path. Without explicit ``repetitions`` ideal platforms run once and
    noisy ones five times. ``n_samples`` limits the test split (0 = all).
    """

    name: str = "experiment"
    network: str = "spikey"
    platform: str = "ideal"
    profile_overrides: Dict[str, Any] = Field(default_factory=dict)
    conversion: ConversionConfig = Field(default_factory=ConversionConfig)
    lif: LifParams = Field(default_factory=LifParams)
    sweep: List[SweepAxis] = Field(default_factory=list)
    batch_size: Optional[int] = Field(default=None, ge=1)
    repetitions: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    n_samples: int = Field(default=1000, ge=0)
    hil: Optional[HilConfig] = None

    @field_validator("sweep")
    @classmethod
    def _at_most_two(cls, sweep: List[SweepAxis]) -> List[SweepAxis]:
        if len(sweep) > 2:
            raise ValueError("at most two parameters can be swept")
        if len({axis.path for axis in sweep}) != len(sweep):
            raise ValueError("a parameter can only be swept once")
        return sweep

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentSpec":
        try:
            return cls.model_validate(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, ValidationError) as e:
            raise ExperimentError(f"cannot read experiment {path}: {e}") from e

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)

    def cells(self) -> List[Tuple[Dict[str, Any], "ExperimentSpec"]]:
        """Cartesian grid of the sweep: (swept values, concrete spec) per cell."""
        if not self.sweep:
            return [({}, self)]
        grid = []
        for values in itertools.product(*(axis.values for axis in self.sweep)):
            point = {axis.path: v for axis, v in zip(self.sweep, values)}
            spec = self
            for path, value in point.items():
                spec = apply_path(spec, path, value)
            grid.append((point, spec.model_copy(update={"sweep": []})))
        return grid


def apply_path(spec: ExperimentSpec, path: str, value: Any) -> ExperimentSpec:
    """
    Copy of ``spec`` with the parameter at a dotted ``path`` replaced.

    ``profile.*`` paths land in ``profile_overrides``; ``hil.*`` creates the
    retraining block when it is missing.

    Example:
        >>> apply_path(ExperimentSpec(), "conversion.f_max", 40).conversion.f_max
        40.0

    Raises:
        ExperimentError: unknown field or invalid value
    """
    data = spec.model_dump()
    head, _, rest = path.partition(".")
    if head == "profile":
        if not rest:
            raise ExperimentError(
                "profile sweeps need a field, e.g. profile.mismatch_cv"
            )
        target = data["profile_overrides"]
        keys = rest.split(".")
        for key in keys[:-1]:
            target = target.setdefault(key, {})
        target[keys[-1]] = value
    else:
        if head == "hil" and data.get("hil") is None:
            data["hil"] = HilConfig().model_dump()
        target = data
        keys = path.split(".")
        for key in keys[:-1]:
            if not isinstance(target.get(key), dict):
                raise ExperimentError(f"unknown sweep path {path!r}")
            target = target[key]
        if keys[-1] not in target:
            raise ExperimentError(f"unknown sweep path {path!r}")
        target[keys[-1]] = value
    try:
        return ExperimentSpec.model_validate(data)
    except ValidationError as e:
        raise ExperimentError(f"invalid value {value!r} for {path}: {e}") from e
