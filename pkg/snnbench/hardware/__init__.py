"""Neuromorphic device profiles, emulation, scheduling and energy models."""

from .device import (
    DeviceInstance,
    DeviceSimulator,
    RunStats,
    device_network,
    instantiate,
    lognormal_unit_mean,
    run_on_device,
)
from .energy import estimate_energy
from .profiles import (
    Capacity,
    EventEnergy,
    HardwareProfile,
    MeteredEnergy,
    list_presets,
    load_profile,
)
from .scheduling import InstancePlan, schedule

__all__ = [
    "Capacity",
    "DeviceInstance",
    "DeviceSimulator",
    "EventEnergy",
    "HardwareProfile",
    "InstancePlan",
    "MeteredEnergy",
    "RunStats",
    "device_network",
    "estimate_energy",
    "instantiate",
    "list_presets",
    "load_profile",
    "lognormal_unit_mean",
    "run_on_device",
    "schedule",
]
