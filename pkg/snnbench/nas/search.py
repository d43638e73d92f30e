"""
snnbench - Genetic Architecture Search
Generational loop with exponential-ranking selection, elitism and
meta-graph recombination.
"""

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..config import config
from ..exceptions import EvaluatorError
from ..metrics import metrics, record_evaluation
from .config import NasConfig
from .evaluators import Evaluator
from .fitness import fitness_key, pareto_front, select
from .genome import Evaluation, Genome
from .metagraph import Individual, MetaGraph, random_genome, recombine

logger = logging.getLogger("snnbench")

PathLike = Union[str, Path]


@dataclass
class SearchResult:
    """Every evaluated genome, the per-generation trace and the pareto front."""

    trace: List[Dict[str, Any]] = field(default_factory=list)
    population: List[Individual] = field(default_factory=list)
    evaluated: Dict[str, Genome] = field(default_factory=dict)
    front: List[Genome] = field(default_factory=list)

    @property
    def best(self) -> Genome:
        return self.population[0].genome

    def generation(self, index: int) -> List[Dict[str, Any]]:
        return [r for r in self.trace if r["generation"] == index]


def genome_seed(seed: int, generation: int, slot: int) -> int:
    return int(np.random.SeedSequence([seed, generation, slot]).generate_state(1)[0])


def trace_record(
    generation: int, slot: int, genome: Genome, elite: bool
) -> Dict[str, Any]:
    ev = genome.evaluation
    return {
        "generation": generation,
        "slot": slot,
        "hash": genome.structure_hash,
        "dims": genome.layer_dims(),
        "edges": [list(e) for e in genome.edges],
        "sequential": genome.is_sequential,
        "accuracy": ev.accuracy if ev else None,
        "neurons": ev.neurons if ev else genome.neuron_count,
        "elite": elite,
    }


def write_pareto_csv(path: PathLike, front: List[Genome]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["hash", "neurons", "accuracy", "dims", "sequential"])
        for g in front:
            writer.writerow(
                [
                    g.structure_hash,
                    g.evaluation.neurons,
                    repr(g.evaluation.accuracy),
                    "x".join(str(d) for d in g.layer_dims()),
                    g.is_sequential,
                ]
            )


class _Evaluations:
    """Structural-hash cache in front of the evaluator."""

    def __init__(self, evaluator: Evaluator, workers: int):
        self.evaluator = evaluator
        self.workers = workers
        self.cache: Dict[str, Evaluation] = {}
        self.genomes: Dict[str, Genome] = {}

    def run(
        self, population: List[Individual], cfg: NasConfig, generation: int
    ) -> None:
        pending: Dict[str, int] = {}
        for slot, ind in enumerate(population):
            h = ind.genome.structure_hash
            if h not in self.cache and h not in pending:
                pending[h] = slot

        def work(item):
            h, slot = item
            seed = genome_seed(cfg.seed, generation, slot)
            return h, self.evaluator(population[slot].genome, seed)

        items = list(pending.items())
        if self.workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(work, items))
        else:
            results = [work(item) for item in items]
        for h, ev in results:
            self.cache[h] = ev
            record_evaluation(success=True)

        for ind in population:
            h = ind.genome.structure_hash
            ind.genome = ind.genome.with_evaluation(self.cache[h])
            self.genomes.setdefault(h, ind.genome)
            ind.meta.credit(ind.genome, fitness_key(ind.genome, cfg))


def initial_population(
    input_dim: int, cfg: NasConfig, rng: np.random.Generator
) -> List[Individual]:
    population: List[Individual] = []
    taken: set = set()
    for _ in range(cfg.population):
        genome = random_genome(input_dim, cfg, rng, taken)
        taken.update(genome.widths)
        population.append(Individual(genome, MetaGraph.from_genome(genome)))
    return population


def evolve(
    cfg: NasConfig,
    evaluator: Evaluator,
    input_dim: int,
    trace_path: Optional[PathLike] = None,
    pareto_path: Optional[PathLike] = None,
    workers: Optional[int] = None,
) -> SearchResult:
    """
    Run the genetic search.

    Generation 0 is a random population of chains. Every later generation
    keeps the ``elitism`` best genomes and fills up with children of pairs
    drawn from the ranked parent selection. Evaluations run concurrently
    and are cached by structure; the evaluator seed of a genome derives from
    ``(seed, generation, slot)``.

    Args:
        cfg: search settings
        evaluator: callable ``(genome, seed) -> Evaluation``
        input_dim: input width of every genome
        trace_path: JSON-lines trace, one line per genome and generation
        pareto_path: CSV of the final pareto front
        workers: concurrent evaluations, default ``config.runtime.workers``

    Returns:
        SearchResult

    Raises:
        EvaluatorError: the evaluator failed; the trace so far is attached
            and has been written to ``trace_path``
    """
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5EA]))
    evaluations = _Evaluations(evaluator, workers or config.runtime.workers)
    result = SearchResult()
    trace_file = open(trace_path, "w") if trace_path is not None else None

    metrics.start_timer("nas_search")
    try:
        population = initial_population(input_dim, cfg, rng)
        for generation in range(cfg.generations):
            try:
                evaluations.run(population, cfg, generation)
            except Exception as e:
                record_evaluation(success=False)
                logger.error(f"Evaluation failed in generation {generation}: {e}")
                raise EvaluatorError(
                    f"evaluation failed in generation {generation}: {e}", result.trace
                ) from e

            population.sort(key=lambda ind: fitness_key(ind.genome, cfg), reverse=True)
            records = [
                trace_record(generation, slot, ind.genome, slot < cfg.elitism)
                for slot, ind in enumerate(population)
            ]
            result.trace.extend(records)
            if trace_file is not None:
                for r in records:
                    trace_file.write(json.dumps(r, sort_keys=True) + "\n")
                trace_file.flush()

            best = population[0].genome.evaluation
            logger.info(
                f"Generation {generation + 1}/{cfg.generations}: "
                f"best {best.accuracy:.4f} with {best.neurons} neurons, "
                f"{len(evaluations.cache)} architectures evaluated"
            )
            if generation == cfg.generations - 1:
                break
            population = next_generation(population, cfg, rng)
    finally:
        metrics.end_timer("nas_search")
        if trace_file is not None:
            trace_file.close()

    result.population = population
    result.evaluated = dict(evaluations.genomes)
    result.front = pareto_front(list(result.evaluated.values()))
    if pareto_path is not None:
        write_pareto_csv(pareto_path, result.front)
    return result


def next_generation(
    ranked: List[Individual], cfg: NasConfig, rng: np.random.Generator
) -> List[Individual]:
    """Elites of a ranked population followed by recombined children."""
    by_genome = {id(ind.genome): ind for ind in ranked}
    chosen = select([ind.genome for ind in ranked], cfg, rng)
    parents = [by_genome[id(g)] for g in chosen]
    children = list(ranked[: cfg.elitism])
    while len(children) < cfg.population:
        if len(parents) > 1:
            i, j = rng.choice(len(parents), size=2, replace=False)
        else:
            i = j = 0
        children.append(recombine(parents[int(i)], parents[int(j)], cfg, rng))
    return children
