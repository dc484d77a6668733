import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inspectre.core import DiscreteDistribution, SampleSet, sample
from inspectre.entropy import empirical_entropy, empirical_entropy_sensitivity
from inspectre.errors import ConfigurationError, SensitivityGuardError
from inspectre.privacy import (
    PrivacyParams,
    PrivateEstimate,
    Provenance,
    SensitivityBound,
    additive_sensitivity,
    brute_sensitivity_oracle,
    laplace_density,
    laplace_noise,
    median_amplify,
    privatize,
)

N_DRAWS = 1_000_000


@pytest.fixture(scope="module")
def draws():
    return laplace_noise(1.7, np.random.default_rng(2024), size=N_DRAWS)


class TestLaplace:
    def test_tail(self, draws):
        b = 1.7
        assert np.mean(np.abs(draws) > 2 * b) == pytest.approx(math.exp(-2), abs=0.002)

    def test_median(self, draws):
        assert abs(np.median(draws)) <= 3 * 1.7 / math.sqrt(N_DRAWS)

    def test_mean_abs(self, draws):
        assert np.mean(np.abs(draws)) == pytest.approx(1.7, rel=0.01)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
    def test_bad_scale(self, bad):
        with pytest.raises(ConfigurationError):
            laplace_noise(bad, 0)

    def test_scalar_and_vector(self):
        assert isinstance(laplace_noise(1.0, 0), float)
        assert laplace_noise(1.0, 0, size=3).shape == (3,)

    def test_seeded(self):
        assert laplace_noise(2.0, 5) == laplace_noise(2.0, 5)

    def test_density_integrates(self):
        x = np.linspace(-40, 40, 400_001)
        f = laplace_density(x, 0.3, 1.5)
        assert np.trapezoid(f, x) == pytest.approx(1.0, abs=1e-6)


class TestPrivatize:
    def test_zero_sensitivity_identity(self):
        out = privatize(5.0, 0.0, 1.0, 0)
        assert out.value == 5.0
        assert out.noise_scale == 0.0

    def test_infinite_epsilon(self):
        out = privatize(-2.5, SensitivityBound(3.0), math.inf, 0)
        assert out.value == -2.5

    def test_tail_probability(self):
        b = privatize(0.0, 1.0, 1.0, 0).noise_scale
        assert b == 1.0
        x = laplace_noise(b, np.random.default_rng(77), size=N_DRAWS)
        assert np.mean(np.abs(x) > 0.5) == pytest.approx(math.exp(-0.5), abs=0.002)

    def test_uses_one_laplace_draw(self):
        rng_a, rng_b = np.random.default_rng(3), np.random.default_rng(3)
        for _ in range(100):
            assert privatize(0.0, 1.0, 1.0, rng_a).value == laplace_noise(1.0, rng_b)

    def test_noise_scale(self):
        out = privatize(0.0, 2 * math.log(10) / 10, 0.5, 0)
        assert out.noise_scale == pytest.approx(0.921034, abs=1e-6)

    def test_params_object(self):
        out = privatize(1.0, SensitivityBound(2.0), PrivacyParams(4.0), 0)
        assert out.noise_scale == 0.5 and out.epsilon == 4.0

    @pytest.mark.parametrize("eps", [0.0, -1.0, math.nan])
    def test_bad_epsilon(self, eps):
        with pytest.raises(ConfigurationError):
            PrivacyParams(eps)
        with pytest.raises(ConfigurationError):
            privatize(1.0, 1.0, eps)

    def test_estimate_invariant(self):
        with pytest.raises(ConfigurationError):
            PrivateEstimate(1.0, 1.0, 0.3, 1.0, SensitivityBound(1.0))

    def test_negative_sensitivity(self):
        with pytest.raises(ConfigurationError):
            SensitivityBound(-1.0)

    @settings(max_examples=50)
    @given(
        st.floats(1e-3, 10), st.floats(1e-2, 10), st.floats(-5, 5), st.floats(0, 1)
    )
    def test_density_ratio(self, delta, eps, v, frac):
        b = privatize(0.0, delta, eps, 0).noise_scale
        v2 = v + frac * delta
        x = np.linspace(v - 20 * b, v + 20 * b, 10_000)
        log_ratio = (np.abs(x - v2) - np.abs(x - v)) / b
        assert log_ratio.max() <= eps + 1e-12


class TestMedianAmplify:
    def _hist_entropy(self, hist):
        return empirical_entropy(hist).value

    def test_single_batch_matches_privatize(self):
        s = sample(DiscreteDistribution.uniform(10), 500, seed=1)
        delta = empirical_entropy_sensitivity(500)
        a = median_amplify(self._hist_entropy, s, 1, delta, 1.0, np.random.default_rng(4))
        b = privatize(empirical_entropy(s).value, delta, 1.0, np.random.default_rng(4))
        assert a.value == b.value

    def test_constant_estimator(self):
        s = SampleSet(np.zeros(50, dtype=np.int64))
        rng = np.random.default_rng(0)
        hits = sum(
            abs(median_amplify(lambda h: 7.0, s, 5, 1.0, 1e6, rng).value - 7.0) <= 1e-4
            for _ in range(2000)
        )
        assert hits / 2000 >= 0.999

    def test_output_is_a_batch_value(self):
        s = sample(DiscreteDistribution.uniform(5), 99, seed=2)
        out = median_amplify(self._hist_entropy, s, 9, 0.5, 1.0, 3)
        assert out.value in out.batch_values
        assert out.value == sorted(out.batch_values)[4]

    @pytest.mark.parametrize("batches", [0, 2, 4, 101])
    def test_bad_batches(self, batches):
        s = sample(DiscreteDistribution.uniform(5), 100, seed=2)
        with pytest.raises(ConfigurationError):
            median_amplify(self._hist_entropy, s, batches, 0.5, 1.0, 0)

    def test_boosts_batch_success(self):
        # Five disjoint batches of 1000 from uniform(10), compared with one run
        # on a single 1000-sample batch at the same epsilon.
        dist = DiscreteDistribution.uniform(10)
        truth = math.log(10)
        batch_delta = empirical_entropy_sensitivity(1000)
        eps, alpha, trials = 0.05, 0.3, 2000
        rng = np.random.default_rng(8)
        fail_median = fail_single = 0
        for t in range(trials):
            s = sample(dist, 5000, seed=[8, t])
            med = median_amplify(self._hist_entropy, s, 5, batch_delta, eps, rng)
            one = privatize(empirical_entropy(s[:1000]).value, batch_delta, eps, rng)
            fail_median += abs(med.value - truth) > alpha
            fail_single += abs(one.value - truth) > alpha
        assert fail_median < fail_single


class TestAdditiveSensitivity:
    def test_identity_table(self):
        out = additive_sensitivity(np.arange(11), 10)
        assert out.delta == 2.0
        assert out.provenance is Provenance.TABLE_SCAN

    def test_two_entry_table(self):
        n = 2
        g = [0.0, 0.5 * math.log(2), 0.0]
        assert additive_sensitivity(g, n).delta == pytest.approx(math.log(2), abs=1e-15)

    def test_plugin_table(self):
        n = 1000
        j = np.arange(n + 1)
        g = np.where(j > 0, j / n * np.log(n / np.maximum(j, 1)), 0.0)
        assert additive_sensitivity(g, n).delta <= 2 * math.log(n) / n + 1e-15

    def test_short_table(self):
        with pytest.raises(ConfigurationError):
            additive_sensitivity([0.0, 1.0], 5)

    def test_prefix_rescan(self):
        g = np.random.default_rng(0).random(30)
        assert additive_sensitivity(g, 20).delta == additive_sensitivity(g[:21]).delta

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(1, 4),
        st.integers(1, 3),
        st.lists(st.floats(-3, 3), min_size=5, max_size=5),
    )
    def test_dominates_oracle(self, n, k, table):
        g = np.asarray(table)

        def estimator(s):
            counts = np.bincount(s.symbols, minlength=k)
            return float(g[counts].sum())

        oracle = brute_sensitivity_oracle(estimator, n, k).delta
        assert additive_sensitivity(g, n).delta >= oracle - 1e-12


class TestBruteOracle:
    def test_constant(self):
        out = brute_sensitivity_oracle(lambda s: 3.0, 3, 3)
        assert out.delta == 0.0
        assert out.provenance is Provenance.EXHAUSTIVE

    def test_entropy_n2_k2(self):
        out = brute_sensitivity_oracle(lambda s: empirical_entropy(s).value, 2, 2)
        assert out.delta == pytest.approx(math.log(2), abs=1e-15)

    @pytest.mark.parametrize("n", range(2, 7))
    @pytest.mark.parametrize("k", range(2, 5))
    def test_entropy_below_formula(self, n, k):
        out = brute_sensitivity_oracle(lambda s: empirical_entropy(s).value, n, k)
        assert out.delta <= 2 * math.log(n) / n + 1e-12

    def test_guard(self):
        with pytest.raises(SensitivityGuardError):
            brute_sensitivity_oracle(lambda s: 0.0, 11, 4)

    def test_hamming_neighbours_only(self):
        # Sum of symbol ids: one substitution moves it by at most k - 1.
        out = brute_sensitivity_oracle(lambda s: float(s.symbols.sum()), 3, 4)
        assert out.delta == 3.0
