import json

import numpy as np
import pytest

from snnbench.conversion.config import ConversionConfig
from snnbench.conversion.convert import classify, convert
from snnbench.exceptions import CapacityError, EnergyModelError, ProfileConfigError, ShapeError
from snnbench.hardware.device import (
    DeviceSimulator,
    RunStats,
    device_network,
    instantiate,
    lognormal_unit_mean,
    run_on_device,
)
from snnbench.hardware.energy import estimate_energy
from snnbench.hardware.profiles import (
    Capacity,
    EventEnergy,
    HardwareProfile,
    MeteredEnergy,
    list_presets,
    load_profile,
)
from snnbench.hardware.scheduling import schedule
from snnbench.snn.network import SnnNetwork
from snnbench.snn.params import LifParams

CFG = ConversionConfig(w_max=0.03)


def stats(n_samples: int, wall_clock_ms: float, events: int = 0) -> RunStats:
    return RunStats(
        profile="test",
        n_samples=n_samples,
        model_time_ms=0.0,
        wall_clock_ms=wall_clock_ms,
        presynaptic_events=events,
        synaptic_events=events,
        generated=[],
        delivered=[],
    )


@pytest.fixture
def toy_net(toy_model):
    return convert(toy_model, LifParams(), CFG)


class TestProfiles:
    def test_presets(self):
        assert list_presets() == [
            "brainscales",
            "genn_cpu",
            "genn_gpu",
            "ideal",
            "nest",
            "spikey",
            "spinn3",
            "spinn5",
        ]
        assert all(load_profile(name).name == name for name in list_presets())

    def test_spikey(self):
        spikey = load_profile("spikey")
        assert spikey.weight_levels == 16
        assert spikey.capacity.per_instance == 384
        assert not spikey.resets_between_samples
        assert not spikey.is_ideal

    def test_ideal(self):
        assert load_profile("ideal").is_ideal

    def test_unknown(self):
        with pytest.raises(ProfileConfigError):
            load_profile("loihi")

    def test_overrides_merge_nested(self):
        p = load_profile("spinn3", {"capacity": {"max_instances": 2}, "speedup": 2.0})
        assert p.capacity.neurons == 16320
        assert p.capacity.max_instances == 2
        assert p.speedup == 2.0

    def test_invalid_override(self):
        with pytest.raises(ProfileConfigError):
            load_profile("ideal", {"mismatch_cv": -1.0})

    def test_from_file(self, tmp_path):
        path = tmp_path / "board.json"
        path.write_text(json.dumps({"name": "board", "energy_model": {"kind": "event_based", "joules_per_event": 1e-9}}))
        profile = load_profile(path)
        assert isinstance(profile.energy_model, EventEnergy)

    def test_unknown_field(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"name": "bad", "clock_hz": 5}))
        with pytest.raises(ProfileConfigError):
            load_profile(path)


class TestSchedule:
    def test_core_limited_instances(self):
        profile = HardwareProfile(name="board", capacity=Capacity(neurons=1020, instance_neurons=255))
        plan = schedule(10000, 199, profile, batch_size=480)
        assert plan.instances == 5
        assert sum(plan.batches) == 21
        assert plan.ranges[0][0] == 0 and plan.ranges[-1][1] == 10000
        for (_, stop), (start, _) in zip(plan.ranges, plan.ranges[1:]):
            assert stop == start

    def test_preset_example(self):
        assert schedule(10000, 199, load_profile("spinn3"), batch_size=480).instances == 21

    def test_one_batch_one_instance(self):
        profile = HardwareProfile(name="board", capacity=Capacity(neurons=1020))
        assert schedule(100, 10, profile, batch_size=100).instances == 1

    def test_network_too_large(self):
        profile = HardwareProfile(name="board", capacity=Capacity(neurons=1020, instance_neurons=255))
        with pytest.raises(CapacityError):
            schedule(100, 300, profile)

    def test_wall_clock(self):
        profile = HardwareProfile(name="board", speedup=10.0, batch_overhead_ms=5.0)
        plan = schedule(100, 10, profile, batch_size=25)
        # four batches on four unlimited instances
        assert plan.instances == 4
        assert plan.wall_clock_ms(profile, 200.0) == pytest.approx(5.0 + 25 * 200.0 / 10.0)


class TestEnergy:
    def test_metered(self):
        profile = HardwareProfile(name="cpu", energy_model=MeteredEnergy(active_power_w=10.0))
        assert estimate_energy(stats(5000, 5070.0), profile) == pytest.approx(0.01014)

    def test_event_energy_is_linear(self):
        profile = HardwareProfile(name="chip", energy_model=EventEnergy(joules_per_event=1e-9))
        one = estimate_energy(stats(10, 0.0, events=1000), profile)
        two = estimate_energy(stats(10, 0.0, events=2000), profile)
        assert two == pytest.approx(2 * one)
        assert one == pytest.approx(1e-7)

    def test_event_based_chip_is_cheapest(self):
        # one 89x100x10 run of 10000 samples with ~960 presynaptic events each
        events = 960 * 10_000

        def energy(name: str, batch_size: int) -> float:
            profile = load_profile(name)
            plan = schedule(10_000, 199, profile, batch_size=batch_size)
            return estimate_energy(stats(10_000, plan.wall_clock_ms(profile, 200.0), events), profile)

        chip = energy("brainscales", 10_000)
        assert chip == pytest.approx(3.3e-4, rel=0.01)
        for name, batch_size in (("genn_cpu", 10_000), ("genn_gpu", 100)):
            assert energy(name, batch_size) >= 10 * chip

    def test_no_samples(self):
        with pytest.raises(EnergyModelError):
            estimate_energy(stats(0, 10.0), load_profile("ideal"))


class TestMismatch:
    def test_zero_cv(self):
        assert np.array_equal(lognormal_unit_mean(np.random.default_rng(0), 0.0, 5), np.ones(5))

    def test_moments(self):
        f = lognormal_unit_mean(np.random.default_rng(0), 0.1, 100_000)
        assert f.mean() == pytest.approx(1.0, abs=0.005)
        assert 0.08 <= f.std() / f.mean() <= 0.12
        assert (f > 0).all()

    def test_frozen_per_seed(self):
        profile = load_profile("spikey")
        a = instantiate(profile, seed=1).mismatch(0, 1, 50)
        b = instantiate(profile, seed=1).mismatch(0, 1, 50)
        c = instantiate(profile, seed=2).mismatch(0, 1, 50)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        assert not np.array_equal(a[0], c[0])

    def test_slots_differ(self):
        dev = instantiate(load_profile("spikey"), seed=1)
        assert not np.array_equal(dev.mismatch(0, 1, 50)[0], dev.mismatch(1, 1, 50)[0])


class TestRunOnDevice:
    def test_ideal_matches_nominal(self, toy_net, toy_splits):
        dev = instantiate(load_profile("ideal"), seed=5)
        result, run = run_on_device(dev, toy_net, toy_splits.test, CFG)
        nominal = classify(toy_net, toy_splits.test, CFG)
        assert np.array_equal(result.counts, nominal.counts)
        assert run.dropped == [0, 0, 0]
        assert run.n_samples == 60

    def test_batch_plan_does_not_change_ideal_results(self, toy_net, toy_splits):
        profile = load_profile("ideal", {"capacity": {"neurons": 100}})
        dev = instantiate(profile)
        result, run = run_on_device(dev, toy_net, toy_splits.test, CFG, batch_size=20)
        nominal = classify(toy_net, toy_splits.test, CFG)
        assert run.plan.instances == 2
        assert np.array_equal(result.counts, nominal.counts)
        assert result.labels.tolist() == toy_splits.test.labels.tolist()

    def test_input_bandwidth_thinning(self, toy_net):
        dev = instantiate(load_profile("ideal", {"input_bw_cap": 300.0}))
        _, run = run_on_device(dev, toy_net, np.ones((3, 20)), ConversionConfig(w_max=0.03, f_max=60.0))
        # 20 pixels x 12 spikes per sample, 60 admitted in 200 ms
        assert run.generated[0] == 720
        assert run.delivered[0] == 180
        assert run.dropped[0] == 540

    def test_output_rate_cap(self, toy_net, toy_splits):
        dev = instantiate(load_profile("ideal", {"neuron_rate_cap": 10.0}))
        result, _ = run_on_device(dev, toy_net, toy_splits.test, CFG)
        assert result.counts.max() <= 3

    def test_capacity(self, toy_net, toy_splits):
        dev = instantiate(load_profile("ideal", {"capacity": {"neurons": 10}}))
        with pytest.raises(CapacityError):
            run_on_device(dev, toy_net, toy_splits.test, CFG)

    def test_weight_level_conflict(self, toy_net, toy_splits):
        dev = instantiate(load_profile("spikey"))
        with pytest.raises(ProfileConfigError):
            run_on_device(dev, toy_net, toy_splits.test, CFG.model_copy(update={"weight_levels": 8}))

    def test_weights_on_device_grid(self, toy_net):
        hw = device_network(toy_net, load_profile("spikey"))
        step = 0.03 / 15
        for w in hw.weights:
            assert np.allclose(w / step, np.round(w / step))

    def test_invalid_lif_override(self, toy_net):
        profile = load_profile("ideal", {"lif_overrides": {"v_thresh": -80.0}})
        with pytest.raises(ProfileConfigError):
            device_network(toy_net, profile)

    def test_noisy_device_is_reproducible(self, toy_net, toy_splits):
        profile = load_profile("spikey")
        a, run_a = run_on_device(instantiate(profile, seed=3), toy_net, toy_splits.test, CFG)
        b, _ = run_on_device(instantiate(profile, seed=3), toy_net, toy_splits.test, CFG)
        assert np.array_equal(a.counts, b.counts)
        assert run_a.plan.instances == 1
        assert run_a.wall_clock_ms == pytest.approx(37.5 + 60 * 200.0 / 10000.0)

    def test_runs_are_counted(self, toy_net, toy_splits):
        dev = instantiate(load_profile("spikey"), seed=3)
        _, first = run_on_device(dev, toy_net, toy_splits.test.subset(0, 5), CFG)
        _, second = run_on_device(dev, toy_net, toy_splits.test.subset(0, 5), CFG)
        assert (first.run_index, second.run_index) == (0, 1)
        assert second.device_seed == 3

    def test_network_without_weights(self):
        empty = SnnNetwork([3, 0], [np.zeros((0, 3))], LifParams())
        with pytest.raises(ShapeError):
            device_network(empty, load_profile("spikey"))

    def test_trial_jitter_is_independent_per_parameter(self, toy_net):
        lif = LifParams()
        dev = instantiate(load_profile("ideal", {"trial_noise_cv": 0.2}), seed=4)
        params = DeviceSimulator(toy_net, dev, run_index=0).population_params(1, 1)
        tau = np.asarray(params.tau_m) / lif.tau_m
        thresh = (np.asarray(params.v_thresh) - lif.v_rest) / (lif.v_thresh - lif.v_rest)
        assert tau.shape == thresh.shape == (16,)
        assert not np.allclose(tau, thresh)
        assert abs(np.corrcoef(tau, thresh)[0, 1]) < 0.9


def mean_device_accuracy(net, dataset, overrides, cfg=CFG, seeds=range(5)) -> float:
    profile = load_profile("ideal", overrides)
    accuracies = [run_on_device(instantiate(profile, seed=s), net, dataset, cfg)[0].accuracy for s in seeds]
    return float(np.mean(accuracies))


@pytest.mark.slow
class TestDegradation:
    @pytest.mark.parametrize(
        "field,levels",
        [("mismatch_cv", [0.0, 0.25, 1.0]), ("membrane_noise_sigma", [0.0, 2.0, 20.0])],
    )
    def test_accuracy_falls_as_imperfection_grows(self, toy_net, toy_splits, field, levels):
        means = [mean_device_accuracy(toy_net, toy_splits.test, {field: v}) for v in levels]
        # averaged over seeds, so allow a small upward wobble between neighbours
        assert all(b <= a + 0.02 for a, b in zip(means, means[1:]))
        assert means[-1] < means[0] - 0.1

    def test_thinning_above_input_bandwidth_costs_accuracy(self, toy_net, toy_splits):
        cfg = CFG.model_copy(update={"f_max": 60.0})
        free = mean_device_accuracy(toy_net, toy_splits.test, {}, cfg)
        wide = mean_device_accuracy(toy_net, toy_splits.test, {"input_bw_cap": 1000.0}, cfg)
        narrow = mean_device_accuracy(toy_net, toy_splits.test, {"input_bw_cap": 10.0}, cfg)
        assert wide == free
        assert narrow < free - 0.2
        dev = instantiate(load_profile("ideal", {"input_bw_cap": 10.0}))
        _, run = run_on_device(dev, toy_net, toy_splits.test, cfg)
        assert run.delivered[0] <= 2 * run.n_samples
        assert run.dropped[0] > 0
