"""
snnbench - Architecture Genomes
Dense-layer DAGs from a fixed input node to a fixed output node.
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from ..exceptions import ShapeError

INPUT = "in"
OUTPUT = "out"

Edge = Tuple[str, str]


@dataclass(frozen=True)
class Evaluation:
    """Evaluation accuracy as a fraction and the number of hidden neurons."""

    accuracy: float
    neurons: int


def topological_order(nodes: Iterable[str], edges: Iterable[Edge]) -> List[str]:
    """Kahn ordering with lexicographic tie-breaking; raises on cycles."""
    nodes = set(nodes)
    edges = list(edges)
    indegree = {n: 0 for n in nodes}
    succ: Dict[str, List[str]] = {n: [] for n in nodes}
    for u, v in edges:
        succ[u].append(v)
        indegree[v] += 1
    ready = sorted(n for n, d in indegree.items() if d == 0)
    order = []
    while ready:
        n = ready.pop(0)
        order.append(n)
        for v in sorted(succ[n]):
            indegree[v] -= 1
            if indegree[v] == 0:
                ready.append(v)
        ready.sort()
    if len(order) != len(nodes):
        raise ShapeError("graph contains a cycle")
    return order


@dataclass
class Genome:
    """
    Architecture DAG.

    ``widths`` maps hidden node ids to layer widths; ``edges`` are dense
    projections. The input node ``"in"`` and the output node ``"out"`` are
    implicit. Every hidden node lies on an input-to-output path.
    """

    widths: Dict[str, int]
    edges: List[Edge]
    input_dim: int
    output_dim: int = 10
    evaluation: Optional[Evaluation] = None
    origin: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.widths = {str(k): int(v) for k, v in self.widths.items()}
        self.edges = sorted({(str(u), str(v)) for u, v in self.edges})
        for name in (INPUT, OUTPUT):
            if name in self.widths:
                raise ShapeError(f"{name!r} is reserved for the fixed end nodes")
        if any(w < 1 for w in self.widths.values()):
            raise ShapeError("layer widths must be positive")
        nodes = set(self.nodes)
        for u, v in self.edges:
            if u not in nodes or v not in nodes:
                raise ShapeError(f"edge {u}->{v} references an unknown node")
            if u == OUTPUT or v == INPUT:
                raise ShapeError(
                    f"edge {u}->{v} runs against the input/output direction"
                )
        self.order = topological_order(nodes, self.edges)
        reach_fwd = self._reachable(INPUT, forward=True)
        reach_bwd = self._reachable(OUTPUT, forward=False)
        if OUTPUT not in reach_fwd:
            raise ShapeError("output is not reachable from input")
        stranded = [n for n in nodes if n not in reach_fwd or n not in reach_bwd]
        if stranded:
            raise ShapeError(f"nodes off every input-output path: {sorted(stranded)}")

    def _reachable(self, start: str, forward: bool) -> Set[str]:
        seen = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for u, v in self.edges:
                a, b = (u, v) if forward else (v, u)
                if a == n and b not in seen:
                    seen.add(b)
                    stack.append(b)
        return seen

    @property
    def nodes(self) -> List[str]:
        return [INPUT, *sorted(self.widths), OUTPUT]

    def width(self, node: str) -> int:
        if node == INPUT:
            return self.input_dim
        if node == OUTPUT:
            return self.output_dim
        return self.widths[node]

    def predecessors(self, node: str) -> List[str]:
        return [u for u, v in self.edges if v == node]

    @property
    def neuron_count(self) -> int:
        """Hidden neurons; input and output layers are the same for every genome."""
        return sum(self.widths.values())

    @property
    def is_sequential(self) -> bool:
        """True for a plain chain input -> h1 -> ... -> output."""
        return len(self.edges) == len(self.widths) + 1 and all(
            len(self.predecessors(n)) == 1 for n in self.order[1:]
        )

    def layer_dims(self) -> List[int]:
        """Widths along the topological order."""
        return [self.width(n) for n in self.order]

    @property
    def structure_hash(self) -> str:
        payload = json.dumps(
            {
                "widths": self.widths,
                "edges": self.edges,
                "in": self.input_dim,
                "out": self.output_dim,
            },
            sort_keys=True,
        )
        return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:16]

    def with_evaluation(self, evaluation: Evaluation) -> "Genome":
        return Genome(
            dict(self.widths),
            list(self.edges),
            self.input_dim,
            self.output_dim,
            evaluation,
            dict(self.origin),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "widths": self.widths,
            "edges": [list(e) for e in self.edges],
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
        }
        if self.evaluation is not None:
            data["evaluation"] = {
                "accuracy": self.evaluation.accuracy,
                "neurons": self.evaluation.neurons,
            }
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Genome":
        evaluation = data.get("evaluation")
        return cls(
            data["widths"],
            [tuple(e) for e in data["edges"]],
            data["input_dim"],
            data.get("output_dim", 10),
            Evaluation(**evaluation) if evaluation else None,
        )

    @classmethod
    def sequential(
        cls,
        input_dim: int,
        hidden: Sequence[int],
        output_dim: int = 10,
        prefix: str = "h",
    ) -> "Genome":
        """
        Chain genome.

        Example:
            >>> Genome.sequential(784, [129]).layer_dims()
            [784, 129, 10]
        """
        ids = [f"{prefix}{i}" for i in range(len(hidden))]
        path = [INPUT, *ids, OUTPUT]
        edges = list(zip(path[:-1], path[1:]))
        return cls(dict(zip(ids, hidden)), edges, input_dim, output_dim)
