"""Genetic architecture search over dense-layer DAGs."""

from .config import NasConfig
from .dagnet import DagAnn, genome_from_model, genome_to_model, train_dag
from .evaluators import Evaluator, MockEvaluator, TrainingEvaluator
from .fitness import (
    better,
    dominates,
    evaluation_key,
    fitness_key,
    pareto_front,
    rank,
    ranking_probabilities,
    select,
)
from .genome import INPUT, OUTPUT, Evaluation, Genome, topological_order
from .metagraph import ElementInfo, Individual, MetaGraph, random_genome, recombine
from .search import SearchResult, evolve, next_generation, write_pareto_csv

__all__ = [
    "INPUT",
    "OUTPUT",
    "DagAnn",
    "ElementInfo",
    "Evaluation",
    "Evaluator",
    "Genome",
    "Individual",
    "MetaGraph",
    "MockEvaluator",
    "NasConfig",
    "SearchResult",
    "TrainingEvaluator",
    "better",
    "dominates",
    "evaluation_key",
    "evolve",
    "fitness_key",
    "genome_from_model",
    "genome_to_model",
    "next_generation",
    "pareto_front",
    "random_genome",
    "rank",
    "ranking_probabilities",
    "recombine",
    "select",
    "topological_order",
    "train_dag",
    "write_pareto_csv",
]
