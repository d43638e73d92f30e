"""
snnbench - DAG Networks
Bias-free ReLU networks over architecture genomes.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..ann.losses import loss_and_delta
from ..ann.model import AnnModel, relu, softmax
from ..ann.train import TrainConfig
from ..exceptions import DivergenceError, ShapeError
from ..metrics import record_training_epoch
from .genome import INPUT, OUTPUT, Edge, Genome

logger = logging.getLogger("snnbench")


@dataclass
class DagAnn:
    """
    Network over a genome: every node is ReLU of the sum of its incoming
    projections, the output node is linear followed by the head.

    ``weights[(u, v)]`` has shape ``(width(v), width(u))``.
    """

    genome: Genome
    weights: Dict[Edge, np.ndarray]
    output_head: str = "softmax"
    loss: str = "cross_entropy"
    history: List[float] = field(default_factory=list)

    @classmethod
    def create(
        cls,
        genome: Genome,
        output_head: str = "softmax",
        loss: str = "cross_entropy",
        seed: int = 0,
    ) -> "DagAnn":
        """Glorot-uniform weights; fan-in counts every incoming projection."""
        rng = np.random.default_rng(seed)
        weights = {}
        for u, v in genome.edges:
            fan_in = sum(genome.width(p) for p in genome.predecessors(v))
            limit = np.sqrt(6.0 / (fan_in + genome.width(v)))
            shape = (genome.width(v), genome.width(u))
            weights[(u, v)] = rng.uniform(-limit, limit, size=shape)
        return cls(genome, weights, output_head, loss)

    def forward(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        """Activations of every node; ``"out"`` holds the logits."""
        if x.ndim != 2 or x.shape[1] != self.genome.input_dim:
            raise ShapeError(
                f"input of shape {x.shape} does not match "
                f"input node {self.genome.input_dim}"
            )
        acts = {INPUT: x}
        for node in self.genome.order[1:]:
            total = sum(
                acts[u] @ self.weights[(u, node)].T
                for u in self.genome.predecessors(node)
            )
            acts[node] = total if node == OUTPUT else relu(total)
        return acts

    def head(self, logits: np.ndarray) -> np.ndarray:
        return softmax(logits) if self.output_head == "softmax" else relu(logits)

    def predict(self, images: np.ndarray, chunk: int = 4096) -> np.ndarray:
        out = [
            self.forward(images[i : i + chunk])[OUTPUT].argmax(axis=1)
            for i in range(0, len(images), chunk)
        ]
        return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)

    def evaluate(self, dataset) -> float:
        if len(dataset) == 0:
            return 0.0
        return float(np.mean(self.predict(dataset.images) == dataset.labels))

    def gradient(self, x: np.ndarray, labels: np.ndarray):
        """Mean loss and the gradient of every edge matrix."""
        acts = self.forward(x)
        logits = acts[OUTPUT]
        loss, delta_out = loss_and_delta(
            self.loss, self.output_head, logits, self.head(logits), labels
        )
        deltas = {OUTPUT: delta_out}
        grads = {}
        for node in reversed(self.genome.order[1:]):
            delta = deltas[node]
            if node != OUTPUT:
                delta = delta * (acts[node] > 0)
            for u in self.genome.predecessors(node):
                grads[(u, node)] = delta.T @ acts[u]
                if u != INPUT:
                    back = delta @ self.weights[(u, node)]
                    deltas[u] = deltas[u] + back if u in deltas else back
        return loss, grads

    def to_ann(self) -> AnnModel:
        """Equivalent AnnModel; only chains have one."""
        if not self.genome.is_sequential:
            raise ShapeError("only sequential genomes convert to a layered model")
        order = self.genome.order
        weights = [self.weights[(u, v)].copy() for u, v in zip(order[:-1], order[1:])]
        return AnnModel(
            self.genome.layer_dims(),
            weights,
            self.output_head,
            self.loss,
            history=list(self.history),
        )


def train_dag(net: DagAnn, train_set, cfg: TrainConfig) -> DagAnn:
    """Mini-batch gradient descent on a copy of ``net``; mirrors ``ann.train``."""
    if train_set.input_dim != net.genome.input_dim:
        raise ShapeError(
            f"dataset input_dim {train_set.input_dim} does not match "
            f"input node {net.genome.input_dim}"
        )
    weights = {e: w.copy() for e, w in net.weights.items()}
    trained = DagAnn(
        net.genome, weights, net.output_head, net.loss, list(net.history)
    )
    rng = np.random.default_rng(cfg.rng_seed)
    n = len(train_set)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        losses = []
        for batch, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            loss, grads = trained.gradient(train_set.images[idx], train_set.labels[idx])
            finite = all(np.all(np.isfinite(g)) for g in grads.values())
            if not np.isfinite(loss) or not finite:
                raise DivergenceError("non-finite loss", epoch, batch)
            for edge, g in grads.items():
                w = trained.weights[edge]
                w -= cfg.learning_rate * (g + cfg.l2 * w)
            losses.append(loss)
        mean_loss = float(np.mean(losses)) if losses else 0.0
        trained.history.append(mean_loss)
        record_training_epoch(mean_loss, n)
        logger.debug(f"DAG epoch {epoch + 1}/{cfg.epochs}: loss {mean_loss:.4f}")
    return trained


def genome_to_model(
    genome: Genome, net: Optional[DagAnn] = None, seed: int = 0
) -> AnnModel:
    """
    Layered model for a sequential genome, with the genome in provenance so
    it survives the model file format.
    """
    net = net or DagAnn.create(genome, seed=seed)
    model = net.to_ann()
    model.provenance["genome"] = genome.to_dict()
    return model


def genome_from_model(model: AnnModel) -> Genome:
    """Genome stored by ``genome_to_model``, else the chain of the layer sizes."""
    stored = model.provenance.get("genome")
    if stored is not None:
        return Genome.from_dict(stored)
    dims = model.layer_dims
    return Genome.sequential(dims[0], dims[1:-1], dims[-1])
