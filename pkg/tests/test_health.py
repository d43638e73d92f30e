from snnbench.config import DataConfig, RuntimeConfig
from snnbench.health import health_check


class TestHealthCheck:
    def test_missing_dataset(self, tmp_path):
        status = health_check(tmp_path)
        assert status["dataset"]["status"] == "unhealthy"
        assert status["presets"]["status"] == "healthy"
        assert status["ledger"]["status"] == "skipped"
        assert status["overall"] == "unhealthy"

    def test_healthy(self, mnist_dir):
        status = health_check(mnist_dir)
        assert status["overall"] == "healthy"
        assert status["dataset"]["counts"]["train-images-idx3-ubyte"] == 30
        assert "spikey" in status["presets"]["presets"]

    def test_ledger(self, ledger, mnist_dir):
        assert health_check(mnist_dir)["ledger"]["status"] == "healthy"


class TestConfig:
    def test_defaults(self):
        runtime = RuntimeConfig()
        assert runtime.workers == 1
        assert runtime.chunk_size == 256

    def test_environment_override(self, monkeypatch):
        monkeypatch.setenv("SNNBENCH_WORKERS", "4")
        monkeypatch.setenv("SNNBENCH_DATA_DIR", "/data/mnist")
        assert RuntimeConfig().workers == 4
        assert DataConfig().dir == "/data/mnist"
