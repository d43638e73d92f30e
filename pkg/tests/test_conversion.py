import numpy as np
import pytest

from snnbench.ann.model import AnnModel, evaluate
from snnbench.ann.train import TrainConfig, train
from snnbench.config import config
from snnbench.conversion.coding import decode, encode, reconstruction_error, round_trip
from snnbench.conversion.config import ConversionConfig
from snnbench.conversion.convert import ClassifiedBatch, LaneRaster, classify, convert
from snnbench.conversion.normalize import normalize_weights, quantize
from snnbench.data.mnist import Dataset
from snnbench.exceptions import DegenerateModelError, ShapeError
from snnbench.snn.params import LifParams

from .conftest import TOY_DIM, toy_dataset

LIF = LifParams()


def small_model(scale: float = 1.0) -> AnnModel:
    return AnnModel(
        [2, 2],
        [scale * np.array([[2.0, -1.0], [0.5, 0.0]])],
        "relu",
        "mse",
    )


class TestNormalize:
    def test_global_scaling(self):
        weights = normalize_weights(small_model(), ConversionConfig(w_max=15.0))
        assert weights[0].tolist() == [[15.0, -7.5], [3.75, 0.0]]

    def test_quantized_levels(self):
        cfg = ConversionConfig(w_max=15.0, weight_levels=16)
        assert normalize_weights(small_model(), cfg)[0].tolist() == [[15.0, -8.0], [4.0, 0.0]]

    def test_quantize_lands_on_grid(self):
        rng = np.random.default_rng(0)
        w = rng.uniform(-1.0, 1.0, size=100)
        q = quantize(w, 1.0, 5)
        assert np.allclose(np.abs(q) * 4, np.round(np.abs(q) * 4))
        assert np.abs(q).max() <= 1.0
        assert np.all(np.abs(q - w) <= 0.125 + 1e-12)

    def test_scale_invariance(self):
        cfg = ConversionConfig(w_max=0.01)
        a = normalize_weights(small_model(), cfg)
        b = normalize_weights(small_model(7.0), cfg)
        assert np.allclose(a[0], b[0])

    def test_peak_is_w_max_across_layers(self, toy_model):
        weights = normalize_weights(toy_model, ConversionConfig(w_max=0.02))
        assert max(np.abs(w).max() for w in weights) == pytest.approx(0.02)

    def test_all_zero_model(self):
        model = AnnModel([2, 2], [np.zeros((2, 2))], "relu", "mse")
        with pytest.raises(DegenerateModelError):
            normalize_weights(model, ConversionConfig())


class TestCoding:
    def test_full_intensity_count(self):
        cfg = ConversionConfig()
        trains = encode(np.array([1.0, 0.0, 0.5]), cfg)
        assert [len(t) for t in trains] == [12, 0, 6]
        assert trains[0][0] == 0.0

    def test_round_trip_error_bound(self):
        cfg = ConversionConfig()
        rng = np.random.default_rng(2)
        images = rng.random((10, 16))
        for i, x in enumerate(images):
            assert np.all(np.abs(round_trip(x, cfg, i) - x) <= 1.0 / 12 + 1e-12)

    def test_reconstruction_error_shape(self):
        error = reconstruction_error(np.full((3, 6), 0.5), ConversionConfig(), shape=(2, 3))
        assert error.shape == (3, 2, 3)
        assert np.allclose(error, 0.0)

    def test_decode_clips(self):
        assert decode(np.array([[24, 6]]), ConversionConfig()).tolist() == [[1.0, 0.5]]

    def test_poisson_streams_are_per_sample(self):
        cfg = ConversionConfig(input_mode="poisson", f_max=200.0, seed=3)
        x = np.full(5, 0.8)
        a = encode(x, cfg, sample=4)
        b = encode(x, cfg, sample=4)
        c = encode(x, cfg, sample=5)
        assert all(np.array_equal(p, q) for p, q in zip(a, b))
        assert not all(np.array_equal(p, q) for p, q in zip(a, c))


class TestClassifiedBatch:
    def test_argmax(self):
        batch = ClassifiedBatch.from_counts(np.array([[3, 10, 2]]), np.array([1]))
        assert batch.predictions.tolist() == [1]
        assert batch.accuracy == 1.0

    def test_ties_go_to_lowest_class(self):
        batch = ClassifiedBatch.from_counts(np.array([[0, 5, 5], [0, 0, 0]]))
        assert batch.predictions.tolist() == [1, 0]
        assert batch.ties.tolist() == [True, True]
        assert batch.no_spike.tolist() == [False, True]

    def test_accuracy_needs_labels(self):
        with pytest.raises(ValueError):
            ClassifiedBatch.from_counts(np.array([[1, 0]])).accuracy

    def test_csv(self, tmp_path):
        batch = ClassifiedBatch.from_counts(np.array([[1, 4], [2, 0]]), np.array([1, 1]))
        batch.to_csv(tmp_path / "c.csv")
        rows = (tmp_path / "c.csv").read_text().splitlines()
        assert rows[0] == "sample_id,true,predicted,count_0,count_1"
        assert rows[2] == "1,1,0,2,0"


class TestConvert:
    def test_structure(self, toy_model):
        net = convert(toy_model, LIF, ConversionConfig())
        assert net.layers == toy_model.layer_dims
        assert net.recorded == (2,)
        assert net.weights[0].shape == toy_model.weights[0].shape

    def test_identity_network(self):
        model = AnnModel([2, 2], [np.eye(2)], "relu", "mse")
        cfg = ConversionConfig(w_max=0.05)
        net = convert(model, LIF, cfg)
        result = classify(net, Dataset(np.eye(2), [0, 1]), cfg)
        assert result.predictions.tolist() == [0, 1]
        assert result.counts[0, 1] == 0 and result.counts[1, 0] == 0

    def test_zero_image_has_no_spikes(self, toy_model):
        net = convert(toy_model, LIF, ConversionConfig())
        result = classify(net, np.zeros((1, toy_model.layer_dims[0])), ConversionConfig())
        assert result.no_spike.tolist() == [True]
        assert result.predictions.tolist() == [0]

    def test_zero_presentation_rejected(self):
        with pytest.raises(ValueError):
            ConversionConfig(t_present=0)

    def test_input_mismatch(self, toy_model):
        net = convert(toy_model, LIF, ConversionConfig())
        with pytest.raises(ShapeError):
            classify(net, np.zeros((2, 3)), ConversionConfig())

    def test_converted_accuracy_tracks_ann(self, toy_model, toy_splits):
        cfg = ConversionConfig(w_max=0.03)
        net = convert(toy_model, LIF, cfg)
        result = classify(net, toy_splits.test, cfg, record_layers=True)
        assert evaluate(toy_model, toy_splits.test) > 0.9
        assert result.accuracy >= 0.7
        assert result.layer_counts[1].shape == (60, 16)
        assert result.stats.delivered[0] == result.layer_counts[0].sum()

    @pytest.mark.slow
    def test_softmax_head_leaves_more_spikes_on_rejected_classes(self, toy_splits):
        cfg = ConversionConfig(w_max=0.03)
        test = toy_dataset(200, seed=5, split_tag="test")
        rejected = {}
        for head, loss in (("softmax", "cross_entropy"), ("relu", "mse")):
            model = AnnModel.create([TOY_DIM, 16, 10], head, loss, non_negative=True, seed=0)
            model = train(model, toy_splits.train, TrainConfig(learning_rate=0.1, batch_size=16, epochs=15))
            counts = classify(convert(model, LIF, cfg), test, cfg).counts
            # share of output spikes that land outside the winning class
            losers = counts.sum(axis=1) - counts.max(axis=1)
            rejected[head] = losers.sum() / max(int(counts.sum()), 1)
        assert rejected["relu"] < rejected["softmax"]

    @pytest.mark.parametrize("input_mode", ["regular", "poisson"])
    def test_chunking_and_workers_do_not_change_results(self, toy_model, toy_splits, monkeypatch, input_mode):
        cfg = ConversionConfig(w_max=0.03, input_mode=input_mode)
        net = convert(toy_model, LIF, cfg)
        whole = classify(net, toy_splits.test, cfg)
        monkeypatch.setattr(config.runtime, "chunk_size", 7)
        chunked = classify(net, toy_splits.test, cfg, workers=3)
        assert np.array_equal(whole.counts, chunked.counts)

    def test_long_gaps_match_resets(self, toy_model, toy_splits):
        reset = ConversionConfig(w_max=0.03)
        lanes = reset.model_copy(update={"reset_between_samples": False, "t_gap": 400.0})
        net = convert(toy_model, LIF, reset)
        subset = toy_splits.test.subset(0, 12)
        a = classify(net, subset, reset)
        b = classify(net, subset, lanes, lanes=5)
        assert np.array_equal(a.counts, b.counts)
        assert b.labels.tolist() == subset.labels.tolist()


class TestLaneRaster:
    def test_layout(self):
        cfg = ConversionConfig(t_present=10.0, t_gap=5.0, f_max=500.0)
        source = LaneRaster(np.ones((5, 3)), 2, cfg)
        assert source.per_lane == 3
        assert source.shape == (45, 2, 3)
        assert source.windows() == [(0, 10), (15, 25), (30, 40)]
        assert not source[12].any()
        assert source[0].tolist() == [[1, 1, 1], [1, 1, 1]]
        # lane 1 has only samples 3 and 4
        assert not source[30][1].any()
