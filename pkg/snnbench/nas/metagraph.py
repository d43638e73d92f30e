"""
snnbench - Meta Graph Recombination
Union graphs of structural elements and path sampling over them.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from ..exceptions import ShapeError
from .config import NasConfig
from .fitness import FitnessKey
from .genome import INPUT, OUTPUT, Edge, Genome


@dataclass
class ElementInfo:
    """Best fitness of any architecture containing the element, last use."""

    best: Optional[FitnessKey] = None
    last_used: int = 0

    def merged(self, other: "ElementInfo") -> "ElementInfo":
        bests = [b for b in (self.best, other.best) if b is not None]
        last_used = max(self.last_used, other.last_used)
        return ElementInfo(max(bests) if bests else None, last_used)


@dataclass
class MetaGraph:
    """
    Every node and edge seen along a genome's ancestry.

    Hidden nodes are identified by id and keep their width; ``in`` and
    ``out`` are implicit and never forgotten.
    """

    widths: Dict[str, int] = field(default_factory=dict)
    nodes: Dict[str, ElementInfo] = field(default_factory=dict)
    edges: Dict[Edge, ElementInfo] = field(default_factory=dict)
    step: int = 0

    @classmethod
    def from_genome(
        cls, genome: Genome, key: Optional[FitnessKey] = None, step: int = 0
    ) -> "MetaGraph":
        meta = cls(step=step)
        meta.touch(genome, step)
        if key is not None:
            meta.credit(genome, key)
        return meta

    def union(self, other: "MetaGraph") -> "MetaGraph":
        merged = MetaGraph(dict(self.widths), dict(self.nodes), dict(self.edges))
        merged.step = max(self.step, other.step)
        for node, width in other.widths.items():
            if merged.widths.setdefault(node, width) != width:
                raise ShapeError(f"node {node} has conflicting widths")
        for node, info in other.nodes.items():
            if node in merged.nodes:
                info = info.merged(merged.nodes[node])
            merged.nodes[node] = info
        for edge, info in other.edges.items():
            if edge in merged.edges:
                info = info.merged(merged.edges[edge])
            merged.edges[edge] = info
        return merged

    def touch(self, genome: Genome, step: int) -> None:
        """Add the genome's elements and mark them used at ``step``."""
        for node, width in genome.widths.items():
            if self.widths.setdefault(node, width) != width:
                raise ShapeError(f"node {node} has conflicting widths")
            info = self.nodes.get(node, ElementInfo())
            self.nodes[node] = ElementInfo(info.best, step)
        for edge in genome.edges:
            info = self.edges.get(edge, ElementInfo())
            self.edges[edge] = ElementInfo(info.best, step)
        self.step = max(self.step, step)

    def credit(self, genome: Genome, key: FitnessKey) -> None:
        """Raise the best fitness of the genome's elements to ``key``."""
        for node in genome.widths:
            info = self.nodes[node]
            if info.best is None or key > info.best:
                info.best = key
        for edge in genome.edges:
            info = self.edges[edge]
            if info.best is None or key > info.best:
                info.best = key

    def prune(self, forget_after: int) -> Set[Any]:
        """Drop elements unused for ``forget_after`` steps; returns what went."""
        stale_nodes = {
            n
            for n, info in self.nodes.items()
            if self.step - info.last_used >= forget_after
        }
        stale_edges = {
            e
            for e, info in self.edges.items()
            if self.step - info.last_used >= forget_after
            or e[0] in stale_nodes
            or e[1] in stale_nodes
        }
        for n in stale_nodes:
            del self.nodes[n]
            del self.widths[n]
        for e in stale_edges:
            del self.edges[e]
        return stale_nodes | stale_edges

    def successors(self, node: str) -> List[str]:
        return sorted(v for u, v in self.edges if u == node)

    def contains(self, genome: Genome) -> bool:
        nodes_known = set(genome.widths) <= set(self.nodes)
        return nodes_known and set(genome.edges) <= set(self.edges)

    def qualities(self) -> Dict[Edge, float]:
        """
        Edge quality in (0, 1] from the rank of its best architecture.

        The best key seen in the graph maps to 1.0; uncredited edges get the
        lowest quality.
        """
        credited = {i.best for i in self.edges.values() if i.best is not None}
        keys = sorted(credited, reverse=True)
        position = {k: r for r, k in enumerate(keys)}
        floor = 1.0 / (len(keys) + 1)
        return {
            e: floor if i.best is None else 1.0 - position[i.best] / (len(keys) + 1)
            for e, i in self.edges.items()
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "nodes": {
                n: {"width": self.widths[n], "last_used": i.last_used}
                for n, i in self.nodes.items()
            },
            "edges": [[u, v, i.last_used] for (u, v), i in sorted(self.edges.items())],
        }


@dataclass
class Individual:
    """A genome together with the meta graph of its ancestry."""

    genome: Genome
    meta: MetaGraph


def fresh_id(rng: np.random.Generator, taken: Iterable[str]) -> str:
    taken = set(taken)
    while True:
        node = f"n{int(rng.integers(2**48)):012x}"
        if node not in taken:
            return node


def log_uniform_width(rng: np.random.Generator, width_range: Tuple[int, int]) -> int:
    low, high = width_range
    return int(round(np.exp(rng.uniform(np.log(low), np.log(high)))))


def mutate_width(rng: np.random.Generator, width: int, cfg: NasConfig) -> int:
    low, high = cfg.width_range
    sigma = np.sqrt(np.log1p(cfg.width_mutation_cv**2))
    mutated = width * rng.lognormal(-0.5 * sigma**2, sigma)
    return int(np.clip(round(mutated), low, high))


def random_genome(
    input_dim: int, cfg: NasConfig, rng: np.random.Generator, taken: Iterable[str] = ()
) -> Genome:
    """Sequential genome with 1..initial_max_depth log-uniform hidden layers."""
    taken = set(taken)
    depth = int(rng.integers(1, cfg.initial_max_depth + 1))
    ids = []
    for _ in range(depth):
        ids.append(fresh_id(rng, taken))
        taken.add(ids[-1])
    widths = {node: log_uniform_width(rng, cfg.width_range) for node in ids}
    path = [INPUT, *ids, OUTPUT]
    return Genome(widths, list(zip(path[:-1], path[1:])), input_dim, cfg.output_dim)


def recombine(
    a: Individual, b: Individual, cfg: NasConfig, rng: np.random.Generator
) -> Individual:
    """
    Child of two individuals.

    The parents' meta graphs are merged and a path from input to output is
    walked over it. Each step chooses among the unvisited successors with
    weight equal to the edge quality; with a positive ``novelty_bonus`` a
    fresh hidden node and a direct jump to the output compete with that
    weight. Forward skip edges between path nodes are then kept with their
    quality (existing ones) or ``novel_skip_prob`` (new ones). The child's
    elements are marked used at the new step and stale elements pruned.
    """
    meta = a.meta.union(b.meta)
    quality = meta.qualities()
    step = meta.step + 1
    input_dim = a.genome.input_dim

    path = [INPUT]
    widths: Dict[str, int] = {}
    visited = {INPUT}
    current = INPUT
    while len(path) - 1 < cfg.max_depth:
        targets: List[str] = []
        weights: List[float] = []
        for v in meta.successors(current):
            if v not in visited:
                targets.append(v)
                weights.append(quality[(current, v)])
        if cfg.novelty_bonus > 0:
            if current == INPUT:
                width = log_uniform_width(rng, cfg.width_range)
            else:
                width = mutate_width(rng, widths[current], cfg)
            node = fresh_id(rng, set(meta.widths) | set(widths))
            targets.append(node)
            weights.append(cfg.novelty_bonus)
            widths[node] = width
            if (current, OUTPUT) not in meta.edges:
                targets.append(OUTPUT)
                weights.append(cfg.novelty_bonus)
        if not targets:
            break
        p = np.asarray(weights) / np.sum(weights)
        chosen = targets[int(rng.choice(len(targets), p=p))]
        # unchosen fresh candidates are discarded
        widths = {n: w for n, w in widths.items() if n in path or n == chosen}
        if chosen == OUTPUT:
            break
        if chosen not in widths:
            widths[chosen] = meta.widths[chosen]
        path.append(chosen)
        visited.add(chosen)
        current = chosen
    path.append(OUTPUT)
    widths = {n: widths[n] for n in path[1:-1]}

    edges = set(zip(path[:-1], path[1:]))
    for i, u in enumerate(path[:-2]):
        for v in path[i + 2 :]:
            if (u, v) in meta.edges:
                if rng.random() < quality[(u, v)]:
                    edges.add((u, v))
            elif cfg.novelty_bonus > 0 and rng.random() < cfg.novel_skip_prob:
                edges.add((u, v))

    child = Genome(widths, sorted(edges), input_dim, cfg.output_dim)
    meta.touch(child, step)
    meta.prune(cfg.forget_after)
    return Individual(child, meta)
