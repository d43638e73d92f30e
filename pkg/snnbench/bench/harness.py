"""
snnbench - Experiment Harness
Sweep grids of convert, schedule, run and measure cells.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..ann.model import evaluate
from ..config import config
from ..conversion.convert import convert
from ..exceptions import ExperimentError, SnnBenchError
from ..hardware.device import instantiate, run_on_device
from ..hardware.energy import estimate_energy
from ..hardware.profiles import HardwareProfile, load_profile
from ..hil.retrain import hil_train
from ..metrics import metrics, record_evaluation
from .networks import NetworkBundle, load_network
from .spec import ExperimentSpec

logger = logging.getLogger("snnbench")

NOISY_REPETITIONS = 5


@dataclass
class RunResult:
    """
    One sweep cell.

    Accuracies and the conversion loss are percentages;
    ``conversion_loss == ann_accuracy - accuracy`` holds exactly. Failed
    cells carry ``error`` and no measurements.
    """

    network: str
    platform: str
    cell: Dict[str, Any] = field(default_factory=dict)
    accuracy: Optional[float] = None
    accuracy_std: Optional[float] = None
    ann_accuracy: Optional[float] = None
    conversion_loss: Optional[float] = None
    wall_clock_ms: Optional[float] = None
    energy_mj: Optional[float] = None
    batch_size: Optional[int] = None
    instances: Optional[int] = None
    repetitions: int = 0
    hil: bool = False
    generated_spikes: List[int] = field(default_factory=list)
    dropped_spikes: List[int] = field(default_factory=list)
    ties: int = 0
    no_spike: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    results: List[RunResult]

    @property
    def failed(self) -> List[RunResult]:
        return [r for r in self.results if not r.ok]


def default_repetitions(profile: HardwareProfile) -> int:
    return 1 if profile.is_ideal else NOISY_REPETITIONS


def run_cell(
    spec: ExperimentSpec, bundle: NetworkBundle, cell: Dict[str, Any]
) -> RunResult:
    """
    Convert, schedule, run and measure one cell.

    Every repetition uses its own device instance (seed ``spec.seed + r``);
    with a ``hil`` block the model is retrained for that instance first.
    Wall clock and energy are averaged over repetitions.
    """
    profile = load_profile(spec.platform, spec.profile_overrides or None)
    test = bundle.splits.test
    if spec.n_samples:
        test = test.subset(0, min(spec.n_samples, len(test)))
    if len(test) == 0:
        raise ExperimentError("the test subset is empty")

    ann_accuracy = 100.0 * evaluate(bundle.model, test)
    repetitions = spec.repetitions or default_repetitions(profile)
    accuracies, walls, energies = [], [], []
    generated = np.zeros(len(bundle.model.layer_dims), dtype=np.int64)
    dropped = np.zeros_like(generated)
    ties = no_spike = 0
    plan = None

    for r in range(repetitions):
        dev = instantiate(profile, spec.seed + r)
        model = bundle.model
        if spec.hil is not None:
            model = hil_train(
                model,
                dev,
                spec.lif,
                spec.conversion,
                spec.hil,
                bundle.splits.train,
                bundle.splits.eval,
            ).model
        net = convert(model, spec.lif, spec.conversion)
        result, stats = run_on_device(dev, net, test, spec.conversion, spec.batch_size)
        accuracies.append(100.0 * result.accuracy)
        walls.append(stats.wall_clock_ms)
        energies.append(1e3 * estimate_energy(stats, profile))
        generated += np.asarray(stats.generated)
        dropped += np.asarray(stats.dropped)
        ties += int(result.ties.sum())
        no_spike += int(result.no_spike.sum())
        plan = stats.plan

    accuracy = float(np.mean(accuracies))
    return RunResult(
        network=bundle.name,
        platform=profile.name,
        cell=cell,
        accuracy=accuracy,
        accuracy_std=float(np.std(accuracies)),
        ann_accuracy=ann_accuracy,
        conversion_loss=ann_accuracy - accuracy,
        wall_clock_ms=float(np.mean(walls)),
        energy_mj=float(np.mean(energies)),
        batch_size=plan.batch_size if plan else spec.batch_size,
        instances=plan.instances if plan else None,
        repetitions=repetitions,
        hil=spec.hil is not None,
        generated_spikes=[int(g) for g in generated],
        dropped_spikes=[int(d) for d in dropped],
        ties=ties,
        no_spike=no_spike,
    )


def run_experiment(
    spec: ExperimentSpec,
    bundle: Optional[NetworkBundle] = None,
    workers: Optional[int] = None,
    cache_dir: Optional[str] = None,
) -> ExperimentResult:
    """
    Run every cell of an experiment's sweep grid.

    Cells run concurrently up to ``workers``; a cell that fails with a
    workbench error (e.g. the network exceeds the device capacity) is
    recorded with its message and the grid carries on.

    Args:
        spec: experiment
        bundle: pre-resolved network; resolved from ``spec.network`` if omitted
        workers: concurrent cells, default ``config.runtime.workers``
        cache_dir: cache for trained network presets

    Returns:
        ExperimentResult with one RunResult per cell, in grid order

    Raises:
        ExperimentError: the network or the platform cannot be resolved
    """
    try:
        load_profile(spec.platform)
    except SnnBenchError as e:
        raise ExperimentError(str(e)) from e
    if bundle is None:
        bundle = load_network(spec.network, cache_dir=cache_dir)

    grid = spec.cells()
    logger.info(f"Experiment {spec.name}: {len(grid)} cells on {spec.platform}")
    metrics.start_timer("experiment")

    def work(item):
        cell, cell_spec = item
        try:
            result = run_cell(cell_spec, bundle, cell)
            record_evaluation(success=True)
            logger.info(
                f"✓ {cell or spec.name}: accuracy {result.accuracy:.2f}% "
                f"(loss {result.conversion_loss:.2f}%), {result.energy_mj:.4g} mJ"
            )
            return result
        except SnnBenchError as e:
            record_evaluation(success=False)
            logger.error(f"✗ {cell or spec.name}: {e}")
            return RunResult(
                network=bundle.name, platform=spec.platform, cell=cell, error=str(e)
            )

    n_workers = workers or config.runtime.workers
    try:
        if n_workers > 1 and len(grid) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(work, grid))
        else:
            results = [work(item) for item in grid]
    finally:
        metrics.end_timer("experiment")
    return ExperimentResult(spec, results)
