"""
snnbench - Architecture Fitness and Selection
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..exceptions import GenomeStateError
from .config import NasConfig
from .genome import Evaluation, Genome

FitnessKey = Tuple[int, float, int]


def fitness_key(genome: Genome, cfg: NasConfig) -> FitnessKey:
    """
    Ordered fitness; larger is better.

    Below the accuracy threshold only accuracy counts. At or above it the
    score trades one percent of accuracy against ``neurons_per_percent``
    neurons. Remaining ties go to the smaller network.

    Raises:
        GenomeStateError: genome has not been evaluated
    """
    if genome.evaluation is None:
        raise GenomeStateError(f"genome {genome.structure_hash} has not been evaluated")
    return evaluation_key(genome.evaluation, cfg)


def evaluation_key(ev: Evaluation, cfg: NasConfig) -> FitnessKey:
    percent = 100.0 * ev.accuracy
    if ev.accuracy < cfg.accuracy_threshold:
        return (0, percent, -ev.neurons)
    return (1, percent - ev.neurons / cfg.neurons_per_percent, -ev.neurons)


def better(a: Genome, b: Genome, cfg: NasConfig) -> bool:
    """True when ``a`` strictly beats ``b``."""
    return fitness_key(a, cfg) > fitness_key(b, cfg)


def rank(population: Sequence[Genome], cfg: NasConfig) -> List[Genome]:
    """Population sorted best first; stable for equal keys."""
    return sorted(population, key=lambda g: fitness_key(g, cfg), reverse=True)


def ranking_probabilities(n: int, base: float) -> np.ndarray:
    """
    First-draw probability of every rank under exponential ranking.

    Example:
        >>> ranking_probabilities(2, 0.5)
        array([0.66666667, 0.33333333])
    """
    weights = np.power(float(base), np.arange(n, dtype=np.float64))
    return weights / weights.sum()


def select(
    population: Sequence[Genome], cfg: NasConfig, rng: np.random.Generator
) -> List[Genome]:
    """
    Draw ``cfg.parents`` genomes without replacement.

    Every draw weights the remaining genomes with ``ranking_base ** r``
    where r is the rank among those still available, so a base of 0 picks
    the top of the ranking deterministically.
    """
    remaining = rank(population, cfg)
    chosen: List[Genome] = []
    for _ in range(min(cfg.parents, len(remaining))):
        p = ranking_probabilities(len(remaining), cfg.ranking_base)
        chosen.append(remaining.pop(int(rng.choice(len(p), p=p))))
    return chosen


def dominates(a: Evaluation, b: Evaluation) -> bool:
    return (
        a.accuracy >= b.accuracy
        and a.neurons <= b.neurons
        and (a.accuracy > b.accuracy or a.neurons < b.neurons)
    )


def pareto_front(genomes: Sequence[Genome]) -> List[Genome]:
    """
    Non-dominated genomes in (accuracy up, neurons down), by neuron count.

    Structurally identical genomes appear once.
    """
    unique = {}
    for g in genomes:
        if g.evaluation is None:
            raise GenomeStateError(f"genome {g.structure_hash} has not been evaluated")
        unique.setdefault(g.structure_hash, g)
    pool = list(unique.values())
    front = [
        g
        for g in pool
        if not any(dominates(o.evaluation, g.evaluation) for o in pool if o is not g)
    ]
    return sorted(front, key=lambda g: (g.evaluation.neurons, -g.evaluation.accuracy))
