"""
snnbench - Metrics Collection
Process-wide counters and timers for simulations, training and evaluations.
"""

import threading
import time
from collections import defaultdict
from typing import Any, Dict


class MetricsCollector:
    """Thread-safe metrics collector for workbench operations."""

    def __init__(self):
        self._lock = threading.Lock()
        self.metrics = defaultdict(float)
        self.timers = {}
        self.start_time = time.time()

    def increment(self, metric: str, value: float = 1):
        """Increment a counter metric."""
        with self._lock:
            self.metrics[metric] += value

    def set_value(self, metric: str, value: float):
        """Set a gauge metric."""
        with self._lock:
            self.metrics[metric] = value

    def start_timer(self, operation: str):
        """Start timing an operation."""
        with self._lock:
            self.timers[operation] = time.time()

    def end_timer(self, operation: str):
        """End timing an operation and accumulate its duration."""
        with self._lock:
            if operation in self.timers:
                duration = time.time() - self.timers.pop(operation)
                self.metrics[f"{operation}_seconds"] += duration
                self.metrics[f"{operation}_count"] += 1

    def get_metrics(self) -> Dict[str, Any]:
        """Get current metrics."""
        with self._lock:
            metrics = dict(self.metrics)
        metrics["uptime_seconds"] = time.time() - self.start_time
        return metrics

    def reset(self):
        """Reset all metrics."""
        with self._lock:
            self.metrics.clear()
            self.timers.clear()
            self.start_time = time.time()


# Global metrics collector
metrics = MetricsCollector()


def record_simulation(steps: int, instances: int):
    """Record one simulator run."""
    metrics.increment("simulation_runs_total")
    metrics.increment("simulation_steps_total", steps)
    metrics.increment("simulation_instance_steps_total", steps * instances)


def record_training_epoch(loss: float, samples: int):
    """Record a finished training epoch."""
    metrics.increment("training_epochs_total")
    metrics.increment("training_samples_total", samples)
    metrics.set_value("training_last_loss", loss)


def record_device_run(samples: int, dropped: int):
    """Record a run on an emulated device."""
    metrics.increment("device_runs_total")
    metrics.increment("device_samples_total", samples)
    metrics.increment("device_dropped_spikes_total", dropped)


def record_evaluation(success: bool = True):
    """Record an architecture or experiment-cell evaluation."""
    metrics.increment("evaluations_total")
    if success:
        metrics.increment("evaluations_success")
    else:
        metrics.increment("evaluations_failed")
