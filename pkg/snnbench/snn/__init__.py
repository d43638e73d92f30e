"""Clock-driven simulation of conductance-based LIF networks."""

from .network import SnnNetwork, SpikeRecord, SpikeStats
from .params import LifParams
from .simulator import PopulationParams, PopulationState, Simulator, run, step
from .trains import (
    n_steps,
    poisson_raster,
    raster_to_trains,
    regular_raster,
    regular_train,
    trains_to_raster,
)

__all__ = [
    "LifParams",
    "PopulationParams",
    "PopulationState",
    "Simulator",
    "SnnNetwork",
    "SpikeRecord",
    "SpikeStats",
    "n_steps",
    "poisson_raster",
    "raster_to_trains",
    "regular_raster",
    "regular_train",
    "run",
    "step",
    "trains_to_raster",
]
