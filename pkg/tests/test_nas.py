import json

import numpy as np
import pytest

from snnbench.ann.model import forward_batch
from snnbench.ann.train import TrainConfig
from snnbench.exceptions import EvaluatorError, GenomeStateError, ShapeError
from snnbench.nas.config import NasConfig
from snnbench.nas.dagnet import DagAnn, genome_from_model, genome_to_model
from snnbench.nas.evaluators import MockEvaluator, TrainingEvaluator
from snnbench.nas.fitness import (
    better,
    evaluation_key,
    fitness_key,
    pareto_front,
    ranking_probabilities,
    select,
)
from snnbench.nas.genome import Evaluation, Genome
from snnbench.nas.metagraph import Individual, MetaGraph, recombine
from snnbench.nas.search import evolve

from .conftest import TOY_DIM

CFG = NasConfig()


def evaluated(accuracy: float, neurons: int, prefix: str = "h") -> Genome:
    return Genome.sequential(4, [neurons], prefix=prefix).with_evaluation(Evaluation(accuracy, neurons))


def individual(genome: Genome) -> Individual:
    return Individual(genome, MetaGraph.from_genome(genome))


def small_search(**overrides) -> NasConfig:
    settings = dict(
        population=4,
        parents=2,
        elitism=1,
        generations=2,
        width_range=(10, 60),
        initial_max_depth=2,
        max_depth=3,
        seed=1,
    )
    return NasConfig(**{**settings, **overrides})


class CountingEvaluator(MockEvaluator):
    def __init__(self, fail_after=None):
        super().__init__(scale=40.0)
        self.calls = 0
        self.fail_after = fail_after

    def __call__(self, genome, seed):
        self.calls += 1
        if self.fail_after is not None and self.calls > self.fail_after:
            raise RuntimeError("training crashed")
        return super().__call__(genome, seed)


class TestConfig:
    def test_presets(self):
        full = NasConfig.full()
        assert (full.population, full.parents, full.elitism, full.generations) == (36, 20, 2, 75)
        desk = NasConfig.desk()
        assert (desk.population, desk.parents, desk.elitism, desk.generations) == (12, 7, 2, 10)

    def test_parents_bounded(self):
        with pytest.raises(ValueError):
            NasConfig(population=4, parents=5)

    def test_elitism_bounded(self):
        with pytest.raises(ValueError):
            NasConfig(population=4, parents=2, elitism=4)

    def test_scaled(self):
        half = NasConfig.full().scaled(0.5)
        assert (half.population, half.parents) == (18, 10)


class TestGenome:
    def test_sequential(self):
        g = Genome.sequential(784, [129])
        assert g.layer_dims() == [784, 129, 10]
        assert g.is_sequential
        assert g.neuron_count == 129

    def test_cycle(self):
        with pytest.raises(ShapeError):
            Genome({"a": 5, "b": 5}, [("in", "a"), ("a", "b"), ("b", "a"), ("b", "out")], 4)

    def test_stranded_node(self):
        with pytest.raises(ShapeError):
            Genome({"a": 5, "b": 5}, [("in", "a"), ("a", "out"), ("in", "b")], 4)

    def test_reserved_name(self):
        with pytest.raises(ShapeError):
            Genome({"in": 5}, [("in", "out")], 4)

    def test_positive_width(self):
        with pytest.raises(ShapeError):
            Genome({"a": 0}, [("in", "a"), ("a", "out")], 4)

    def test_skip_edge(self):
        g = Genome({"a": 5}, [("in", "a"), ("a", "out"), ("in", "out")], 4)
        assert not g.is_sequential
        assert g.predecessors("out") == ["a", "in"]

    def test_hash_ignores_edge_order(self):
        edges = [("in", "a"), ("a", "out"), ("in", "out")]
        a = Genome({"a": 5}, edges, 4)
        b = Genome({"a": 5}, list(reversed(edges)), 4)
        assert a.structure_hash == b.structure_hash
        assert a.structure_hash != Genome({"a": 6}, edges, 4).structure_hash

    def test_dict_round_trip(self):
        g = evaluated(0.9, 20)
        restored = Genome.from_dict(json.loads(json.dumps(g.to_dict())))
        assert restored.structure_hash == g.structure_hash
        assert restored.evaluation == g.evaluation


class TestFitness:
    def test_below_threshold_only_accuracy(self):
        assert evaluation_key(Evaluation(0.95, 200), CFG) == (0, 95.0, -200)

    def test_above_threshold_trades_size(self):
        key = evaluation_key(Evaluation(0.98, 200), CFG)
        assert key[0] == 1 and key[1] == pytest.approx(96.0)
        assert better(evaluated(0.98, 100), evaluated(0.99, 300, "g"), CFG)
        assert better(evaluated(0.971, 1000), evaluated(0.969, 10, "g"), CFG)

    def test_ties_go_to_smaller(self):
        assert better(evaluated(0.9, 50), evaluated(0.9, 60, "g"), CFG)

    def test_unevaluated(self):
        with pytest.raises(GenomeStateError):
            fitness_key(Genome.sequential(4, [5]), CFG)

    def test_ranking_probabilities(self):
        assert np.allclose(ranking_probabilities(2, 0.5), [2 / 3, 1 / 3])
        assert ranking_probabilities(3, 0.0).tolist() == [1.0, 0.0, 0.0]

    def test_base_zero_selects_top(self):
        population = [evaluated(0.5 + 0.01 * i, 10 + i, f"p{i}_") for i in range(8)]
        cfg = NasConfig(population=8, parents=3, elitism=0, ranking_base=0.0)
        chosen = select(population, cfg, np.random.default_rng(0))
        assert [g.evaluation.accuracy for g in chosen] == pytest.approx([0.57, 0.56, 0.55])

    def test_parents_are_distinct(self):
        population = [evaluated(0.5 + 0.01 * i, 10 + i, f"p{i}_") for i in range(8)]
        cfg = NasConfig(population=8, parents=8, elitism=0)
        chosen = select(population, cfg, np.random.default_rng(1))
        assert len({id(g) for g in chosen}) == 8

    @pytest.mark.slow
    def test_first_draw_frequencies(self):
        n, draws = 36, 100_000
        population = [evaluated(0.5 + 0.01 * i, 10 + i, f"p{i}_") for i in range(n)]
        cfg = NasConfig(population=n, parents=1, elitism=0, ranking_base=0.9)
        rng = np.random.default_rng(2)
        counts = np.zeros(n)
        ranked = sorted(population, key=lambda g: g.evaluation.accuracy, reverse=True)
        position = {id(g): r for r, g in enumerate(ranked)}
        for _ in range(draws):
            counts[position[id(select(population, cfg, rng)[0])]] += 1
        p = ranking_probabilities(n, 0.9)
        expected = draws * p
        # the goodness-of-fit statistic stays within 3 sigma of its chi-square mean
        chi2 = float(np.sum((counts - expected) ** 2 / expected))
        assert chi2 <= (n - 1) + 3 * np.sqrt(2 * (n - 1))
        se = np.sqrt(p * (1 - p) / draws)
        assert np.all(np.abs(counts / draws - p) <= 4 * se)

    def test_pareto_front(self):
        a, b, c = evaluated(0.9, 100, "a"), evaluated(0.95, 200, "b"), evaluated(0.93, 300, "c")
        front = pareto_front([c, b, a, a])
        assert [g.evaluation for g in front] == [a.evaluation, b.evaluation]


class TestMetaGraph:
    def test_forgetting(self):
        g = Genome.sequential(4, [5])
        meta = MetaGraph.from_genome(g, step=0)
        meta.step = 4
        assert meta.prune(5) == set()
        meta.step = 5
        gone = meta.prune(5)
        assert "h0" in gone and ("in", "h0") in gone
        assert not meta.nodes and not meta.edges

    def test_credit_keeps_best(self):
        g = Genome.sequential(4, [5])
        meta = MetaGraph.from_genome(g, key=(0, 80.0, -5))
        meta.credit(g, (0, 70.0, -5))
        assert meta.nodes["h0"].best == (0, 80.0, -5)
        assert set(meta.qualities().values()) == {1.0}

    def test_union_rejects_width_conflict(self):
        a = MetaGraph.from_genome(Genome.sequential(4, [5]))
        b = MetaGraph.from_genome(Genome.sequential(4, [6]))
        with pytest.raises(ShapeError):
            a.union(b)

    def test_identical_parents_without_novelty(self):
        cfg = NasConfig(novelty_bonus=0.0)
        parent = individual(Genome.sequential(4, [20, 30], prefix="x"))
        rng = np.random.default_rng(0)
        for _ in range(20):
            child = recombine(parent, parent, cfg, rng)
            assert set(child.genome.edges) <= set(parent.genome.edges)
            assert set(child.genome.widths) <= set(parent.genome.widths)

    def test_novelty_introduces_nodes(self):
        cfg = NasConfig(novelty_bonus=1.0, max_depth=4)
        parent = individual(Genome.sequential(4, [20], prefix="x"))
        rng = np.random.default_rng(0)
        children = [recombine(parent, parent, cfg, rng).genome for _ in range(30)]
        assert any(set(c.widths) - set(parent.genome.widths) for c in children)
        assert all(len(c.widths) <= cfg.max_depth for c in children)
        assert all(10 <= w <= 1500 for c in children for w in c.widths.values())

    def test_crossover_mixes_parents(self):
        cfg = NasConfig(novelty_bonus=0.0)
        a = individual(Genome.sequential(4, [20], prefix="a"))
        b = individual(Genome.sequential(4, [30], prefix="b"))
        rng = np.random.default_rng(3)
        seen = {tuple(sorted(recombine(a, b, cfg, rng).genome.widths)) for _ in range(40)}
        assert ("a0",) in seen and ("b0",) in seen


class TestDagAnn:
    def test_gradient_matches_finite_differences(self):
        genome = Genome({"a": 3, "b": 2}, [("in", "a"), ("a", "b"), ("b", "out"), ("in", "b"), ("a", "out")], 3, 4)
        net = DagAnn.create(genome, seed=0)
        rng = np.random.default_rng(1)
        x = rng.uniform(0.1, 1.0, size=(5, 3))
        labels = rng.integers(0, 4, size=5)
        _, grads = net.gradient(x, labels)
        eps = 1e-5
        for edge, w in net.weights.items():
            numeric = np.zeros_like(w)
            for idx in np.ndindex(*w.shape):
                original = w[idx]
                w[idx] = original + eps
                plus, _ = net.gradient(x, labels)
                w[idx] = original - eps
                minus, _ = net.gradient(x, labels)
                w[idx] = original
                numeric[idx] = (plus - minus) / (2 * eps)
            assert np.allclose(grads[edge], numeric, rtol=1e-5, atol=1e-7)

    def test_chain_matches_layered_model(self):
        genome = Genome.sequential(5, [4, 3], output_dim=2)
        net = DagAnn.create(genome, seed=2)
        model = genome_to_model(genome, net)
        x = np.random.default_rng(0).random((6, 5))
        assert np.allclose(net.forward(x)["out"], forward_batch(model, x).logits)
        assert genome_from_model(model).structure_hash == genome.structure_hash

    def test_skip_genome_has_no_layered_model(self):
        genome = Genome({"a": 3}, [("in", "a"), ("a", "out"), ("in", "out")], 3, 2)
        with pytest.raises(ShapeError):
            DagAnn.create(genome).to_ann()

    def test_training_evaluator(self, toy_splits):
        evaluator = TrainingEvaluator(toy_splits.train, toy_splits.eval, TrainConfig(epochs=3, learning_rate=0.2))
        ev = evaluator(Genome.sequential(TOY_DIM, [12]), seed=0)
        assert ev.neurons == 12
        assert 0.0 <= ev.accuracy <= 1.0
        assert ev == evaluator(Genome.sequential(TOY_DIM, [12]), seed=0)


class TestEvolve:
    def test_mock_search(self, tmp_path):
        cfg = small_search()
        result = evolve(cfg, MockEvaluator(scale=40.0), 16, tmp_path / "trace.jsonl", tmp_path / "pareto.csv")
        assert len(result.trace) == 8
        lines = (tmp_path / "trace.jsonl").read_text().splitlines()
        assert len(lines) == 8
        record = json.loads(lines[0])
        assert set(record) == {"generation", "slot", "hash", "dims", "edges", "sequential", "accuracy", "neurons", "elite"}
        best_key = max(fitness_key(g, cfg) for g in result.evaluated.values())
        assert fitness_key(result.best, cfg) == best_key
        assert (tmp_path / "pareto.csv").read_text().startswith("hash,neurons,accuracy,dims,sequential")

    def test_elitism_keeps_best(self):
        cfg = small_search(generations=10)
        result = evolve(cfg, MockEvaluator(scale=40.0), 16)
        best = [
            max(evaluation_key(Evaluation(r["accuracy"], r["neurons"]), cfg) for r in result.generation(i))
            for i in range(cfg.generations)
        ]
        assert all(b >= a for a, b in zip(best, best[1:]))

    def test_evaluations_are_cached(self):
        evaluator = CountingEvaluator()
        result = evolve(small_search(generations=5), evaluator, 16)
        assert evaluator.calls == len(result.evaluated)

    def test_reproducible_and_worker_independent(self):
        a = evolve(small_search(generations=4), MockEvaluator(scale=40.0), 16, workers=1)
        b = evolve(small_search(generations=4), MockEvaluator(scale=40.0), 16, workers=3)
        assert a.trace == b.trace

    def test_failure_keeps_partial_trace(self, tmp_path):
        path = tmp_path / "trace.jsonl"
        with pytest.raises(EvaluatorError) as info:
            evolve(small_search(generations=5), CountingEvaluator(fail_after=4), 16, path)
        trace = info.value.trace
        assert len(trace) >= 4 and len(trace) % 4 == 0
        assert len(path.read_text().splitlines()) == len(trace)
