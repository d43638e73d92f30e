"""
snnbench - Architecture Evaluators
Callables mapping ``(genome, seed)`` to an Evaluation.
"""

import logging
from typing import Callable, Optional

import numpy as np

from ..ann.train import TrainConfig
from .dagnet import DagAnn, train_dag
from .genome import Evaluation, Genome

logger = logging.getLogger("snnbench")

Evaluator = Callable[[Genome, int], Evaluation]


class MockEvaluator:
    """
    Deterministic stand-in for training.

    Accuracy rises with the hidden neuron count towards ``ceiling`` and is
    independent of the seed, so searches can be checked exhaustively.
    """

    def __init__(
        self, ceiling: float = 0.99, scale: float = 150.0, depth_penalty: float = 0.0
    ):
        self.ceiling = ceiling
        self.scale = scale
        self.depth_penalty = depth_penalty

    def __call__(self, genome: Genome, seed: int) -> Evaluation:
        n = genome.neuron_count
        accuracy = self.ceiling * (1.0 - np.exp(-n / self.scale))
        accuracy -= self.depth_penalty * (len(genome.widths) - 1)
        accuracy -= self.depth_penalty * (len(genome.edges) - len(genome.widths) - 1)
        return Evaluation(float(np.clip(accuracy, 0.0, 1.0)), n)


class TrainingEvaluator:
    """Trains a DagAnn on ``train_set`` and reports accuracy on ``eval_set``."""

    def __init__(
        self,
        train_set,
        eval_set,
        train_config: Optional[TrainConfig] = None,
        output_head: str = "softmax",
        loss: str = "cross_entropy",
    ):
        self.train_set = train_set
        self.eval_set = eval_set
        self.train_config = train_config or TrainConfig(epochs=5)
        self.output_head = output_head
        self.loss = loss

    def __call__(self, genome: Genome, seed: int) -> Evaluation:
        net = DagAnn.create(genome, self.output_head, self.loss, seed=seed)
        cfg = self.train_config.model_copy(update={"rng_seed": seed})
        trained = train_dag(net, self.train_set, cfg)
        accuracy = trained.evaluate(self.eval_set)
        logger.debug(
            f"Genome {genome.structure_hash}: {accuracy:.4f} "
            f"with {genome.neuron_count} neurons"
        )
        return Evaluation(accuracy, genome.neuron_count)
