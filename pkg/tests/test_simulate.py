"""Monte Carlo simulator: reproducibility, distributional correctness,
thinning consistency, plug-in mutual-information estimates."""
import math

import numpy as np
import pytest
from scipy import stats

import ltipc as lp
from ltipc.simulate import poisson_draw, substream

from helpers import poisson_pmf_recurrence


def chi2_gof_poisson(samples: np.ndarray, lam: float, significance: float) -> bool:
    """Goodness of fit against Poisson(lam), tail-pooled to expected >= 5."""
    n = samples.size
    kmax = int(lam + 10 * math.sqrt(lam + 1)) + 5
    pmf = poisson_pmf_recurrence(lam, kmax)
    pmf[-1] += max(0.0, 1.0 - pmf.sum())
    expected = n * pmf
    # pool the tail so every bin has expected count >= 5
    cut = np.searchsorted(np.cumsum(expected[::-1]), 5.0)
    cut = kmax - cut
    observed = np.bincount(np.minimum(samples, cut), minlength=cut + 1)
    exp_pooled = np.concatenate([expected[:cut], [expected[cut:].sum()]])
    stat = float(((observed - exp_pooled) ** 2 / exp_pooled).sum())
    return stat <= stats.chi2.ppf(1 - significance, df=cut)


class TestPoissonSampler:
    def test_deterministic_given_stream(self):
        a = poisson_draw(substream(9, 4), 7.5, 1000)
        b = poisson_draw(substream(9, 4), 7.5, 1000)
        np.testing.assert_array_equal(a, b)

    def test_zero_intensity(self):
        np.testing.assert_array_equal(poisson_draw(substream(1, 0), 0.0, 10),
                                      np.zeros(10, dtype=np.int64))

    @pytest.mark.parametrize("lam", [0.8, 5.0, 29.5, 30.0, 45.0, 120.0])
    def test_distribution(self, lam):
        """Chi-square goodness of fit across the inversion/accept-reject
        cutoff at significance 1e-3."""
        x = poisson_draw(substream(123, 7), lam, 100_000)
        assert chi2_gof_poisson(x, lam, 1e-3)

    def test_rejects_bad_intensity(self):
        with pytest.raises(ValueError):
            poisson_draw(substream(0, 0), -1.0, 5)


class TestSimulateP2P:
    def spec(self):
        return lp.ChannelSpec(lp.ImpulseResponse((0.7, 0.3)), 5.0, 40.0, 5.0)

    def test_reproducible(self):
        sim = lp.SimConfig(seed=42, n_slots=16, n_trials=25)
        x = np.linspace(0, 40, 16)
        t1 = lp.simulate_p2p(self.spec(), x, sim)
        t2 = lp.simulate_p2p(self.spec(), x, sim)
        np.testing.assert_array_equal(t1.outputs, t2.outputs)
        assert not np.array_equal(
            t1.outputs,
            lp.simulate_p2p(self.spec(), x, lp.SimConfig(seed=43, n_slots=16,
                                                         n_trials=25)).outputs)

    def test_all_zero_input_no_noise(self):
        spec = lp.ChannelSpec(lp.ImpulseResponse((0.7, 0.3)), 0.0, 40.0, 5.0)
        sim = lp.SimConfig(seed=1, n_slots=10, n_trials=20)
        trace = lp.simulate_p2p(spec, np.zeros(10), sim)
        assert np.all(trace.outputs == 0)

    def test_constant_input_slot_means(self):
        """After the memory transient the mean settles at lam0 + c."""
        spec = lp.ChannelSpec(lp.ImpulseResponse((0.7, 0.3)), 5.0, 40.0, 10.0)
        n_trials = 3000
        sim = lp.SimConfig(seed=5, n_slots=12, n_trials=n_trials)
        trace = lp.simulate_p2p(spec, np.full(12, 10.0), sim)
        means = trace.outputs[:, 0, :].mean(axis=0)
        se = math.sqrt(15.0 / n_trials)
        np.testing.assert_allclose(means[1:], 15.0, atol=4 * se)

    def test_single_pulse_spreads_by_taps(self):
        spec = self.spec()
        n_trials = 4000
        sim = lp.SimConfig(seed=6, n_slots=3, n_trials=n_trials)
        trace = lp.simulate_p2p(spec, np.array([40.0, 0.0, 0.0]), sim)
        means = trace.outputs[:, 0, :].mean(axis=0)
        for slot, lam in enumerate([5 + 0.7 * 40, 5 + 0.3 * 40, 5.0]):
            assert abs(means[slot] - lam) <= 4 * math.sqrt(lam / n_trials)

    def test_rejects_out_of_range_inputs(self):
        sim = lp.SimConfig(seed=1, n_slots=2, n_trials=1)
        with pytest.raises(ValueError):
            lp.simulate_p2p(self.spec(), np.array([0.0, 41.0]), sim)


class TestThinning:
    def test_split_arrivals_match_independent_poissons(self):
        """Splitting Poisson(x) arrivals with probabilities (p0, p1) yields
        independent Poisson(x p0), Poisson(x p1) slot counts; chi-square at
        significance 1e-3 over 1e5 trials."""
        x, p0, p1 = 6.0, 0.5, 0.3
        n_trials = 100_000
        gen = substream(2718, 99)
        totals = poisson_draw(gen, x, n_trials)
        grand = int(totals.sum())
        u = gen.random(grand)
        cats = np.searchsorted(np.array([p0, p0 + p1]), u, side="right")
        trial_idx = np.repeat(np.arange(n_trials), totals)
        counts = np.zeros((n_trials, 3), dtype=np.int64)
        np.add.at(counts, (trial_idx, cats), 1)

        assert chi2_gof_poisson(counts[:, 0], x * p0, 1e-3)
        assert chi2_gof_poisson(counts[:, 1], x * p1, 1e-3)

        # independence of the two slots
        cap0 = int(np.quantile(counts[:, 0], 0.995))
        cap1 = int(np.quantile(counts[:, 1], 0.995))
        table = np.zeros((cap0 + 1, cap1 + 1), dtype=np.int64)
        np.add.at(table, (np.minimum(counts[:, 0], cap0),
                          np.minimum(counts[:, 1], cap1)), 1)
        _, pvalue, _, _ = stats.chi2_contingency(table)
        assert pvalue > 1e-3


class TestSimulateNetwork:
    def net(self):
        # tx0 -> rx0 with spread taps, tx1 -> rx1 direct; cross links zero
        impulses = np.zeros((2, 2, 2))
        impulses[0, 0] = (0.6, 0.4)
        impulses[1, 1] = (1.0, 0.0)
        return lp.NetworkSpec(impulses=impulses, lambda0=2.0,
                              amax=np.array([20.0, 20.0]),
                              alpha=np.array([10.0, 10.0]))

    def test_single_node_matches_p2p_law(self):
        """s = d = 1 network follows the same Poisson slot law as the point
        to point simulator."""
        taps = (0.7, 0.3)
        net = lp.NetworkSpec(impulses=np.array([[taps]]), lambda0=5.0,
                             amax=np.array([40.0]), alpha=np.array([5.0]))
        n_trials = 3000
        sim = lp.SimConfig(seed=12, n_slots=8, n_trials=n_trials)
        x = np.full((1, 8), 10.0)
        trace = lp.simulate_network(net, x, sim)
        spec = lp.ChannelSpec(lp.ImpulseResponse(taps), 5.0, 40.0, 5.0)
        lam = 5.0 + lp.convolve(x[0], spec.impulse)
        means = trace.outputs[:, 0, :].mean(axis=0)
        for slot in range(8):
            assert abs(means[slot] - lam[slot]) <= 4 * math.sqrt(lam[slot] / n_trials)
        assert chi2_gof_poisson(trace.outputs[:, 0, -1], lam[-1], 1e-3)

    def test_superposition_of_two_transmitters(self):
        impulses = np.zeros((2, 1, 2))
        impulses[0, 0] = (0.6, 0.4)
        impulses[1, 0] = (1.0, 0.0)
        net = lp.NetworkSpec(impulses=impulses, lambda0=1.0,
                             amax=np.array([10.0, 10.0]),
                             alpha=np.array([5.0, 5.0]))
        n_trials = 3000
        sim = lp.SimConfig(seed=13, n_slots=10, n_trials=n_trials)
        x = np.vstack([np.full(10, 4.0), np.full(10, 6.0)])
        trace = lp.simulate_network(net, x, sim)
        means = trace.outputs[:, 0, 1:].mean(axis=0)
        np.testing.assert_allclose(means, 11.0,
                                   atol=4 * math.sqrt(11.0 / n_trials))

    def test_zero_impulse_pair_is_isolated(self):
        """A pulse on tx0 shows at rx0 but leaves rx1 at its baseline."""
        net = self.net()
        n_trials = 4000
        sim = lp.SimConfig(seed=14, n_slots=6, n_trials=n_trials)
        x = np.zeros((2, 6))
        x[0, 2] = 20.0  # pulse on tx0 only
        trace = lp.simulate_network(net, x, sim)
        rx0 = trace.outputs[:, 0, :].mean(axis=0)
        rx1 = trace.outputs[:, 1, :].mean(axis=0)
        assert rx0[2] > 2.0 + 0.6 * 20.0 - 4 * math.sqrt(14.0 / n_trials)
        np.testing.assert_allclose(rx1, 2.0, atol=4 * math.sqrt(2.0 / n_trials))

    def test_dimension_mismatch(self):
        sim = lp.SimConfig(seed=1, n_slots=4, n_trials=1)
        with pytest.raises(ValueError):
            lp.simulate_network(self.net(), np.zeros((1, 4)), sim)


class TestPluginMi:
    def test_identity_channel(self):
        ch = lp.DiscreteChannel(np.eye(2), np.zeros(2), (0, 1), (0, 1))
        est = lp.plugin_mi_estimate(ch, [0.5, 0.5], 1_000_000, seed=21)
        assert abs(est.value - math.log(2)) < 0.003

    def test_identical_rows_near_zero(self):
        row = np.array([0.3, 0.7])
        ch = lp.DiscreteChannel(np.tile(row, (2, 1)), np.zeros(2), (0, 1), (0, 1))
        est = lp.plugin_mi_estimate(ch, [0.5, 0.5], 100_000, seed=22)
        assert est.value <= 3 * est.stderr + est.bias + 1e-9

    def test_matches_exact_mi_within_error(self):
        spec = lp.ChannelSpec(lp.ImpulseResponse((1.0,)), 5.0, 40.0, 5.0)
        ch = lp.build_memoryless_channel(spec, lp.InputGrid((0.0, 40.0)))
        p = np.array([0.875, 0.125])
        exact = lp.mutual_information(ch, p)
        est = lp.plugin_mi_estimate(ch, p, 200_000, seed=23)
        assert abs(est.value - exact) <= 3 * est.stderr + est.bias

    def test_minimum_sample_guard(self):
        ch = lp.DiscreteChannel(np.eye(2), np.zeros(2), (0, 1), (0, 1))
        with pytest.raises(ValueError):
            lp.plugin_mi_estimate(ch, [0.5, 0.5], 10, seed=0)


class TestTraceExport:
    def test_row_streams(self):
        spec = lp.ChannelSpec(lp.ImpulseResponse((1.0,)), 1.0, 5.0, 1.0)
        sim = lp.SimConfig(seed=3, n_slots=2, n_trials=2)
        trace = lp.simulate_p2p(spec, np.array([1.0, 2.0]), sim)
        inp = list(trace.input_rows())
        out = list(trace.output_rows())
        assert len(inp) == 2 * 2 and len(out) == 2 * 2
        assert inp[0] == (0, 0, 0, 1.0) and inp[1] == (0, 1, 0, 2.0)
        assert all(y >= 0 and isinstance(y, int) for (_, _, _, y) in out)
