"""
snnbench - Custom Exceptions
Custom exception classes for the snnbench package.
"""

from typing import Any, List, Optional


class SnnBenchError(Exception):
    """Base exception for all workbench errors."""

    pass


class DatasetFormatError(SnnBenchError):
    """Raised when an IDX file has a bad magic number or header."""

    pass


class DatasetConsistencyError(SnnBenchError):
    """Raised when images and labels disagree or a file is truncated."""

    pass


class DownloadError(SnnBenchError):
    """Raised when fetching the dataset from the mirror fails."""

    pass


class ShapeError(SnnBenchError, ValueError):
    """Raised on dimension mismatches between data, models and networks."""

    pass


class DivergenceError(SnnBenchError):
    """Raised when training produces a non-finite loss or update."""

    def __init__(self, message: str, epoch: int, batch: int):
        super().__init__(f"{message} (epoch {epoch}, batch {batch})")
        self.epoch = epoch
        self.batch = batch


class NumericalError(SnnBenchError):
    """Raised when the simulator state becomes non-finite."""

    def __init__(self, message: str, layer: int, neuron: int):
        super().__init__(f"{message} (layer {layer}, neuron {neuron})")
        self.layer = layer
        self.neuron = neuron


class DegenerateModelError(SnnBenchError):
    """Raised when a model cannot be converted, e.g. all weights are zero."""

    pass


class CapacityError(SnnBenchError):
    """Raised when a network does not fit on a device."""

    pass


class ProfileConfigError(SnnBenchError):
    """Raised when a hardware profile is missing or conflicts with a config."""

    pass


class EnergyModelError(SnnBenchError):
    """Raised when energy per inference cannot be computed."""

    pass


class GenomeStateError(SnnBenchError):
    """Raised when a genome is used before it has been evaluated."""

    pass


class EvaluatorError(SnnBenchError):
    """Raised when architecture evaluation fails; carries the partial trace."""

    def __init__(self, message: str, trace: Optional[List[Any]] = None):
        super().__init__(message)
        self.trace = trace or []


class ExperimentError(SnnBenchError):
    """Raised when an experiment references something that cannot be resolved."""

    pass
