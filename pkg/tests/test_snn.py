import json

import numpy as np
import pytest

from snnbench.exceptions import NumericalError, ShapeError
from snnbench.snn.network import SnnNetwork
from snnbench.snn.params import LifParams
from snnbench.snn.simulator import PopulationParams, PopulationState, Simulator, run, step
from snnbench.snn.trains import (
    poisson_raster,
    raster_to_trains,
    regular_raster,
    regular_train,
    trains_to_raster,
)

LIF = LifParams()


def single_neuron(weight: float, lif: LifParams = LIF, dt: float = 1.0) -> SnnNetwork:
    return SnnNetwork([1, 1], [np.array([[weight]])], lif, dt=dt)


def output_count(net: SnnNetwork, rate_hz: float, duration: float = 1000.0) -> int:
    record = run(net, [regular_train(rate_hz, duration)], duration)
    return int(record.layer_counts(1).sum())


class TestParams:
    def test_defaults(self):
        assert LIF.leak_conductance == pytest.approx(0.01)

    def test_threshold_above_reset(self):
        with pytest.raises(ValueError):
            LifParams(v_thresh=-70.0)

    def test_reversal_potentials(self):
        with pytest.raises(ValueError):
            LifParams(e_rev_i=-60.0)

    def test_frozen(self):
        with pytest.raises(ValueError):
            LIF.tau_m = 5.0


class TestStep:
    def test_rest_is_fixed_point(self):
        state = PopulationState.resting(1, 3, LIF.v_rest)
        fired = step(state, np.zeros((1, 3)), np.zeros((1, 3)), PopulationParams.from_lif(LIF), 1.0)
        assert not fired.any()
        assert np.allclose(state.v, LIF.v_rest)

    def test_membrane_decay_matches_closed_form(self):
        params = PopulationParams.from_lif(LIF)
        state = PopulationState.resting(1, 1, LIF.v_rest)
        state.v += 10.0
        zeros = np.zeros((1, 1))
        for _ in range(int(LIF.tau_m)):
            step(state, zeros, zeros, params, 1.0)
        expected = LIF.v_rest + 10.0 * np.exp(-1.0)
        assert abs(state.v[0, 0] - expected) <= 0.02 * 10.0 * np.exp(-1.0)

    def test_refractory_and_conductance_invariants(self):
        lif = LifParams(t_refrac=2.0)
        params = PopulationParams.from_lif(lif)
        rng = np.random.default_rng(0)
        state = PopulationState.resting(1, 50, lif.v_rest)
        last_spike = np.full(50, -np.inf)
        for t in range(10_000):
            g_exc = rng.exponential(0.01, size=(1, 50))
            g_inh = rng.exponential(0.002, size=(1, 50))
            fired = step(state, g_exc, g_inh, params, 1.0)[0]
            assert (state.g_e >= 0).all() and (state.g_i >= 0).all()
            if fired.any():
                assert (t - last_spike[fired] >= lif.t_refrac).all()
                last_spike[fired] = t
        assert np.isfinite(last_spike).any()

    def test_non_finite_state(self):
        state = PopulationState.resting(1, 4, LIF.v_rest)
        state.v[0, 2] = np.nan
        zeros = np.zeros((1, 4))
        with pytest.raises(NumericalError) as info:
            step(state, zeros, zeros, PopulationParams.from_lif(LIF), 1.0, layer=2)
        assert info.value.neuron == 2
        assert info.value.layer == 2

    def test_threshold_factor_scales_distance_above_rest(self):
        params = PopulationParams.from_lif(LIF, thresh_factor=np.array([1.0, 2.0]))
        assert params.v_thresh.tolist() == [-50.0, -35.0]


class TestNetwork:
    def test_shape_chaining(self):
        with pytest.raises(ShapeError):
            SnnNetwork([2, 3], [np.zeros((2, 3))], LIF)

    def test_positive_dt(self):
        with pytest.raises(ValueError):
            SnnNetwork([1, 1], [np.zeros((1, 1))], LIF, dt=0.0)

    def test_output_layer_recorded_by_default(self):
        net = SnnNetwork([2, 3, 1], [np.zeros((3, 2)), np.zeros((1, 3))], LIF)
        assert net.recorded == (2,)
        assert net.neuron_count == 6


class TestRun:
    def test_no_input_no_output(self):
        net = SnnNetwork([3, 4, 2], [np.full((4, 3), 0.05), np.full((2, 4), 0.05)], LIF)
        record = run(net, [np.zeros(0)] * 3, 500.0)
        assert all(not c.any() for layer, c in record.counts.items())
        assert record.duration == 500.0

    def test_zero_weight_silences(self):
        assert output_count(single_neuron(0.0), 60.0) == 0

    def test_input_count_mismatch(self):
        with pytest.raises(ShapeError):
            run(single_neuron(0.01), [np.zeros(0), np.zeros(0)], 100.0)

    def test_refractory_spacing_in_run(self):
        lif = LifParams(t_refrac=2.0)
        record = run(single_neuron(0.5, lif), [regular_train(1000.0, 200.0)], 200.0)
        times = record.spike_times(1, 0)
        assert len(times) > 10
        assert np.all(np.diff(times) >= lif.t_refrac)

    def test_refractory_of_one_step(self):
        # the step after a spike is clamped, so a saturated neuron fires every other step
        lif = LifParams(t_refrac=1.0)
        record = run(single_neuron(0.5, lif), [regular_train(1000.0, 50.0)], 50.0)
        times = record.spike_times(1, 0)
        assert len(times) == 25
        assert np.allclose(np.diff(times), 2.0)

    def test_spikes_stamped_at_end_of_step(self):
        record = run(single_neuron(0.5), [np.array([0.0])], 10.0, record=(0, 1))
        assert record.spike_times(0, 0).tolist() == [0.0]
        assert record.spike_times(1, 0)[0] == 1.0

    def test_rate_response_is_rectifying_and_monotone(self):
        rates = [0.0, 20.0, 50.0, 100.0, 200.0, 400.0, 800.0]
        net = single_neuron(0.004)
        counts = [output_count(net, r) for r in rates]
        assert counts[0] == counts[1] == 0
        assert counts[-1] > 0
        assert all(b >= a for a, b in zip(counts, counts[1:]))
        assert all(b > a for a, b in zip(counts, counts[1:]) if a > 0)

    def test_window_counts_and_stats(self):
        net = SnnNetwork([2, 2], [np.array([[0.05, 0.0], [0.0, 0.0]])], LIF)
        raster = regular_raster(np.array([[100.0, 0.0]]), 200.0, 1.0)
        record = Simulator(net).run(raster, windows=[(0, 100), (100, 200)])
        assert record.layer_counts(0, 0).tolist() == [[10, 0]]
        assert record.layer_counts(0, 1).tolist() == [[10, 0]]
        stats = record.stats
        assert stats.generated == stats.delivered
        # output spikes have no targets and only the first source has a synapse
        assert stats.presynaptic_events == 20
        assert stats.synaptic_events == 20

    def test_exports(self, tmp_path):
        record = run(single_neuron(0.05), [regular_train(50.0, 200.0)], 200.0)
        record.to_csv(tmp_path / "spikes.csv", layer=1)
        record.to_json(tmp_path / "summary.json")
        rows = (tmp_path / "spikes.csv").read_text().splitlines()
        assert rows[0] == "neuron_id,time_ms"
        assert len(rows) - 1 == len(record.spike_times(1, 0))
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["layers"]["1"]["total"] == len(rows) - 1

    def test_unrecorded_layer(self):
        record = run(single_neuron(0.05), [regular_train(50.0, 100.0)], 100.0, record=())
        with pytest.raises(KeyError):
            record.spike_times(1, 0)

    @pytest.mark.slow
    def test_rate_matches_fine_step_reference(self):
        coarse = output_count(single_neuron(0.003, dt=1.0), 300.0)
        fine = output_count(single_neuron(0.003, dt=0.01), 300.0)
        assert fine > 0
        assert abs(coarse - fine) <= 0.05 * fine


class TestTrains:
    def test_regular_train_count(self):
        assert len(regular_train(60.0, 200.0)) == 12
        assert len(regular_train(0.0, 200.0)) == 0

    def test_raster_matches_trains(self):
        rates = np.array([[60.0, 25.0, 0.0]])
        raster = regular_raster(rates, 200.0, 1.0)
        trains = [regular_train(r, 200.0) for r in rates[0]]
        assert np.array_equal(raster, trains_to_raster(trains, 200.0, 1.0))
        recovered = raster_to_trains(raster, 1.0)
        for a, b in zip(recovered, trains):
            assert np.allclose(a, np.floor(b + 1e-9))

    def test_poisson_is_seeded(self):
        rates = np.full((2, 5), 80.0)
        a = poisson_raster(rates, 500.0, 1.0, np.random.default_rng(4))
        b = poisson_raster(rates, 500.0, 1.0, np.random.default_rng(4))
        assert np.array_equal(a, b)
        assert 0 < a.sum() < a.size
