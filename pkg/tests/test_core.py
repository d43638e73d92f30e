import json

import pytest

from snnbench.bench.harness import RunResult
from snnbench.bench.report import to_json
from snnbench.core.loader import load
from snnbench.core.models import Experiment, HilEpochRow, NasEvaluation, RunResultRow
from snnbench.metrics import MetricsCollector


@pytest.fixture
def results_dir(tmp_path):
    out = tmp_path / "sweep"
    out.mkdir()
    rows = [
        RunResult("spikey", "ideal", {"conversion.f_max": 30}, accuracy=88.0, ann_accuracy=89.0, conversion_loss=1.0),
        RunResult("spikey", "ideal", {"conversion.f_max": 60}, error="capacity"),
    ]
    (out / "results.json").write_text(to_json(rows))
    (out / "spec.json").write_text(json.dumps({"name": "f_max sweep", "network": "spikey", "platform": "ideal", "seed": 4}))
    return out


class TestLoader:
    def test_results(self, ledger, results_dir):
        assert load(results_dir / "results.json") == 3
        session = ledger.get_session()
        try:
            experiment = session.query(Experiment).one()
            assert experiment.name == "f_max sweep"
            assert experiment.seed == 4
            cells = session.query(RunResultRow).order_by(RunResultRow.id).all()
            assert [c.cell for c in cells] == [{"conversion.f_max": 30}, {"conversion.f_max": 60}]
            assert cells[1].error == "capacity" and cells[1].accuracy is None
        finally:
            session.close()

    def test_nas_trace(self, ledger, tmp_path):
        path = tmp_path / "nas_trace.jsonl"
        records = [
            {"generation": 0, "slot": i, "hash": f"h{i}", "dims": [20, 5, 10], "edges": [["in", "a"]], "sequential": True, "accuracy": 0.5, "neurons": 5, "elite": i == 0}
            for i in range(3)
        ]
        path.write_text("\n".join(json.dumps(r) for r in records) + "\n\n")
        assert load([path]) == 3
        session = ledger.get_session()
        try:
            rows = session.query(NasEvaluation).all()
            assert {r.search for r in rows} == {"nas_trace"}
            assert sum(r.elite for r in rows) == 1
        finally:
            session.close()

    def test_hil_trace(self, ledger, tmp_path):
        path = tmp_path / "hil_trace.json"
        data = {
            "kind": "hil_trace",
            "provenance": {"hil": {"profile": "spikey", "device_seed": 2}},
            "trace": [{"epoch": 0, "device_accuracy": 0.6, "loss": 0.0}, {"epoch": 1, "device_accuracy": 0.8, "loss": 0.3}],
        }
        path.write_text(json.dumps(data))
        assert load(str(path)) == 2
        session = ledger.get_session()
        try:
            rows = session.query(HilEpochRow).order_by(HilEpochRow.epoch).all()
            assert [r.device_accuracy for r in rows] == [0.6, 0.8]
            assert rows[0].profile == "spikey"
        finally:
            session.close()

    def test_unrecognised_file(self, ledger, tmp_path):
        path = tmp_path / "other.json"
        path.write_text(json.dumps({"hello": "world"}))
        assert load(path) == 0

    def test_rollback_on_error(self, ledger, tmp_path, results_dir):
        broken = tmp_path / "broken.json"
        broken.write_text("{")
        with pytest.raises(json.JSONDecodeError):
            load([results_dir / "results.json", broken])
        session = ledger.get_session()
        try:
            assert session.query(Experiment).count() == 0
        finally:
            session.close()

    def test_uninitialized(self):
        with pytest.raises(RuntimeError):
            load("anything.json")


class TestMetrics:
    def test_counters_and_timers(self):
        m = MetricsCollector()
        m.increment("runs")
        m.increment("runs", 2)
        m.start_timer("sim")
        m.end_timer("sim")
        snapshot = m.get_metrics()
        assert snapshot["runs"] == 3
        assert snapshot["sim_count"] == 1
        assert snapshot["sim_seconds"] >= 0
        m.reset()
        assert "runs" not in m.get_metrics()
