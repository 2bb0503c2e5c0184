import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chancf import ChanParams, DegenerateDigits, DomainError, EmptySample
from chancf.ergodic_stats import (
    SimulationConfig,
    birkhoff_average,
    block_rng,
    entropy,
    fibonacci_log_trace,
    khinchin_chi,
    ks_statistic,
    levy_growth,
    levy_growth_bound,
    orbit_digits,
    random_fibonacci,
    simulate_pushforward,
)
from chancf.invariant_measure import MeasureSpec, cdf_omega, sample_gamma

from .oracles import fibonacci_exact_logs, ks_bruteforce, levy_dilog

# frozen from the dilogarithm oracle at 30 digits
LEVY2 = 1.30022987985518
LEVY3 = 1.45799834299942
# sup |x - omega_2(x)|, maximised with mpmath.findroot on rho_2(x) = 1
KS0_M2 = 0.1363557013


class TestKS:
    def test_hand_example(self):
        assert ks_statistic([0.25, 0.75], lambda x: x) == pytest.approx(0.25)

    @pytest.mark.parametrize("n", [1, 10, 1000])
    def test_exact_quantiles(self, n):
        x = sample_gamma((np.arange(n) + 0.5) / n, 2)
        assert ks_statistic(x, lambda y: cdf_omega(y, 2)) == pytest.approx(1 / (2 * n), abs=1e-12)

    @settings(max_examples=50)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
    def test_matches_brute_force(self, xs):
        x = np.sort(xs)
        f = lambda y: np.asarray(y) ** 2
        assert ks_statistic(x, f) == pytest.approx(ks_bruteforce(x, f), abs=1e-15)

    def test_empty(self):
        with pytest.raises(EmptySample):
            ks_statistic([], lambda x: x)

    def test_unsorted(self):
        with pytest.raises(DomainError):
            ks_statistic([0.5, 0.1], lambda x: x)


class TestPushforward:
    def test_initial_distance(self):
        cfg = SimulationConfig(ChanParams(2), 200_000, 0, seed=1)
        rep = simulate_pushforward(cfg)
        assert rep.ks[0] == pytest.approx(KS0_M2, abs=0.002 + 3 * rep.sampling_noise)

    def test_deterministic_across_threads(self):
        cfg = SimulationConfig(ChanParams(3), 50_000, 5, seed=9, block_size=4096)
        a = simulate_pushforward(cfg, threads=1)
        b = simulate_pushforward(cfg, threads=4)
        assert np.array_equal(a.ks, b.ks) and np.array_equal(a.errors, b.errors)

    def test_seed_changes_output(self):
        a = simulate_pushforward(SimulationConfig(ChanParams(2), 10_000, 1, seed=1))
        b = simulate_pushforward(SimulationConfig(ChanParams(2), 10_000, 1, seed=2))
        assert not np.array_equal(a.ks, b.ks)

    def test_stationary_start(self):
        p = ChanParams(2)
        cfg = SimulationConfig(p, 200_000, 20, seed=3, initial=MeasureSpec("gamma", p))
        rep = simulate_pushforward(cfg)
        assert np.all(np.abs(rep.ks - rep.ks[0]) <= 3 * rep.sampling_noise)

    def test_monotone_trend(self):
        p = ChanParams(2)
        ks = np.mean([simulate_pushforward(SimulationConfig(p, 100_000, 8, seed=s)).ks
                      for s in range(5)], axis=0)
        noise = 1.36 / math.sqrt(100_000)
        assert np.all(np.diff(ks) <= noise)
        assert ks[-1] <= 2 * noise

    def test_error_profile_shape(self):
        rep = simulate_pushforward(SimulationConfig(ChanParams(2), 1000, 3), eval_points=11)
        assert rep.errors.shape == (4, 11)
        assert np.allclose(rep.errors[:, 0], 0) and np.allclose(rep.errors[:, -1], 0)

    @pytest.mark.parametrize("kw", [dict(samples=0, iterations=1), dict(samples=10, iterations=-1),
                                    dict(samples=10, iterations=1, seed=-1),
                                    dict(samples=10, iterations=1, seed=2 ** 64)])
    def test_config_validation(self, kw):
        with pytest.raises(DomainError):
            SimulationConfig(ChanParams(2), **kw)


class TestConstants:
    def test_chi_range_and_positivity(self):
        assert 0.95 <= khinchin_chi(2).value <= 1.0
        for m in range(2, 11):
            assert khinchin_chi(m).value > 0

    @pytest.mark.parametrize("m", [2, 3, 5, 10])
    def test_chi_direct_sum(self, m):
        from chancf.invariant_measure import digit_probability
        i = np.arange(400)
        want = math.log(m) * float(np.sum(i * digit_probability(i, m)))
        assert khinchin_chi(m).value == pytest.approx(want, abs=1e-13)

    @pytest.mark.parametrize("m,want", [(2, LEVY2), (3, LEVY3)])
    def test_levy_frozen(self, m, want):
        r = levy_growth(m)
        assert r.value == pytest.approx(want, abs=1e-12)
        assert r.error <= 1e-11

    @pytest.mark.parametrize("m", range(2, 11))
    def test_levy_dilog_oracle_and_bound(self, m):
        v = levy_growth(m).value
        assert v == pytest.approx(float(levy_dilog(m)), abs=1e-11)
        assert v <= levy_growth_bound(m)

    def test_bound_m2(self):
        assert levy_growth_bound(2) == pytest.approx(ChanParams(2).k_m * 5 / 12, rel=1e-15)
        assert levy_growth_bound(2) == pytest.approx(1.44836, abs=1e-5)

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_entropy_identity(self, m):
        h = entropy(m)
        assert h.discrepancy <= 1e-6
        assert h.discrepancy <= 2 * (h.quadrature.error + h.identity.error) + 1e-12

    def test_entropy_m2(self):
        h = entropy(2)
        assert h.quadrature.value == pytest.approx(1.62, abs=0.02)
        want = 2 * levy_growth(2, 2.5e-11).value - khinchin_chi(2, 2.5e-11).value
        assert h.identity.value == pytest.approx(want, abs=1e-15)

    def test_bad_tol(self):
        for f in (khinchin_chi, levy_growth, entropy):
            with pytest.raises(DomainError):
                f(2, tol=0)


class TestBirkhoff:
    def test_one(self):
        assert birkhoff_average("one", 3, 1000) == 1.0

    def test_unknown(self):
        with pytest.raises(DomainError):
            birkhoff_average("square", 2, 10)

    def test_digit_average(self):
        est = birkhoff_average("digit", 2, 300_000, seed=5) * math.log(2)
        assert est == pytest.approx(khinchin_chi(2).value, rel=0.01)

    def test_reproducible(self):
        assert birkhoff_average("neg_log", 3, 5000, seed=4) == birkhoff_average("neg_log", 3, 5000, seed=4)

    def test_orbit_digits_follow_gamma(self):
        from chancf.invariant_measure import digit_probability
        d = np.array(orbit_digits(0.3141592653589793, 200_000, 2, seed=1))
        freq = np.bincount(d, minlength=4)[:4] / d.size
        np.testing.assert_allclose(freq, digit_probability(np.arange(4), 2), atol=0.005)


class TestFibonacci:
    def test_two_steps(self):
        np.testing.assert_allclose(fibonacci_log_trace([0, 1], 2), [0.0, math.log(3)], atol=1e-15)

    def test_classical(self):
        g = random_fibonacci(2, 2000, digits=[0] * 2000)
        assert g.estimates[0] == pytest.approx(math.log((1 + math.sqrt(5)) / 2), abs=1e-3)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 6), st.lists(st.integers(0, 6), min_size=1, max_size=300))
    def test_matches_big_integers(self, m, digits):
        got = fibonacci_log_trace(digits, m)
        want = fibonacci_exact_logs(digits, m)
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)

    def test_no_overflow(self):
        tr = fibonacci_log_trace([900] * 50, 2)
        assert np.all(np.isfinite(tr))
        assert tr[-1] == pytest.approx(900 * 50 * math.log(2), rel=1e-12)

    def test_short_digit_source(self):
        with pytest.raises(DegenerateDigits):
            random_fibonacci(2, 10, digits=[0, 1])

    def test_bad_length(self):
        with pytest.raises(DomainError):
            random_fibonacci(2, 1)

    def test_seeds(self):
        g = random_fibonacci(3, 20_000, seeds=(0, 1, 2))
        assert len(g.estimates) == 3 and g.stderr > 0
        assert g.mean == pytest.approx(levy_growth(3).value, rel=0.03)


def test_block_rng_independent_streams():
    a = block_rng(0, 0).random(4)
    b = block_rng(0, 1).random(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, block_rng(0, 0).random(4))
