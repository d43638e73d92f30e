"""
snnbench - Instance Scheduling
Split a test set into batches and spread them over parallel network instances.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ..exceptions import CapacityError
from .profiles import HardwareProfile


@dataclass
class InstancePlan:
    """
    Contiguous sample ranges per parallel instance.

    Every instance processes ``batches[i]`` batches one after another; the
    instances run side by side.
    """

    instances: int
    batch_size: int
    network_neurons: int
    ranges: List[Tuple[int, int]] = field(default_factory=list)
    batches: List[int] = field(default_factory=list)

    @property
    def shares(self) -> List[int]:
        return [stop - start for start, stop in self.ranges]

    def wall_clock_ms(self, profile: HardwareProfile, t_sample_ms: float) -> float:
        """Modelled platform time: the slowest instance decides."""
        if not self.ranges:
            return 0.0
        return max(
            n_batches * profile.batch_overhead_ms
            + share * t_sample_ms / profile.speedup
            for n_batches, share in zip(self.batches, self.shares)
        )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["ranges"] = [list(r) for r in self.ranges]
        return data


def schedule(
    n_samples: int,
    network_neurons: int,
    profile: HardwareProfile,
    batch_size: Optional[int] = None,
) -> InstancePlan:
    """
    Plan parallel instances for ``n_samples`` samples.

    ``instances = min(capacity // network_neurons, ceil(n_samples / batch_size))``,
    further limited by the profile's instance count. Samples are cut into
    contiguous batches and each instance receives a contiguous block of them.

    Example:
        >>> plan = schedule(10000, 199, load_profile("spinn3"), batch_size=480)
        >>> plan.instances
        21

    Raises:
        CapacityError: the network does not fit one instance
    """
    cap = profile.capacity
    limit = cap.per_instance
    if limit is not None and network_neurons > limit:
        raise CapacityError(
            f"network of {network_neurons} neurons exceeds {profile.name} "
            f"capacity of {limit} neurons per instance"
        )
    batch_size = batch_size or max(n_samples, 1)
    if batch_size < 1:
        raise ValueError("batch_size must be positive")
    if n_samples <= 0:
        return InstancePlan(0, batch_size, network_neurons)

    n_batches = -(-n_samples // batch_size)
    instances = n_batches
    if cap.neurons is not None:
        instances = min(instances, cap.neurons // network_neurons)
    if cap.max_instances is not None:
        instances = min(instances, cap.max_instances)
    instances = max(instances, 1)

    base, extra = divmod(n_batches, instances)
    ranges, batches = [], []
    batch = 0
    for i in range(instances):
        count = base + (1 if i < extra else 0)
        start = batch * batch_size
        stop = min((batch + count) * batch_size, n_samples)
        ranges.append((start, stop))
        batches.append(count)
        batch += count
    return InstancePlan(instances, batch_size, network_neurons, ranges, batches)
