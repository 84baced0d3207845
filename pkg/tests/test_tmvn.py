"""Truncated normal samplers against scipy and rejection references."""

import numpy as np
import pytest
from scipy.stats import truncnorm

from nonparanormal.numeric import RngStream
from nonparanormal.tmvn import (
    MIN_WIDTH,
    TruncatedNormalSpec,
    constrained_gibbs_sweep,
    sample_tmvn_step,
    sample_univariate_tn,
)
from conftest import random_spd

INTERVALS = [
    (-1.0, 1.0),
    (2.0, 6.0),
    (4.5, 9.0),     # entirely beyond the tail threshold
    (-9.0, -4.5),   # mirrored tail
    (0.3, 0.35),    # narrow
    (-np.inf, 0.0),
    (1.5, np.inf),
    (6.0, np.inf),  # one-sided far tail
]


class TestUnivariate:
    @pytest.mark.parametrize("a,b", INTERVALS)
    def test_moments_match_scipy(self, a, b):
        gen = np.random.default_rng(314159)
        n = 60000
        draws = np.array([sample_univariate_tn(0.0, 1.0, a, b, gen) for _ in range(n)])
        ref = truncnorm(a, b)
        se_mean = ref.std() / np.sqrt(n)
        assert abs(draws.mean() - ref.mean()) < 4 * se_mean
        assert draws.var() == pytest.approx(ref.var(), rel=0.05)
        assert draws.min() >= a and draws.max() <= b

    def test_location_scale(self):
        gen = np.random.default_rng(7)
        mean, var, lo, hi = 2.0, 4.0, 1.0, 6.0
        n = 50000
        draws = np.array([sample_univariate_tn(mean, var, lo, hi, gen) for _ in range(n)])
        sd = np.sqrt(var)
        ref = truncnorm((lo - mean) / sd, (hi - mean) / sd, loc=mean, scale=sd)
        assert abs(draws.mean() - ref.mean()) < 4 * ref.std() / np.sqrt(n)
        assert np.all((draws > lo) & (draws < hi))

    def test_strictly_interior(self):
        gen = np.random.default_rng(5)
        for _ in range(2000):
            x = sample_univariate_tn(0.0, 1.0, 0.0, 1e-9, gen)
            assert 0.0 < x < 1e-9

    def test_rejects_bad_arguments(self):
        gen = np.random.default_rng(1)
        with pytest.raises(ValueError):
            sample_univariate_tn(0.0, -1.0, 0.0, 1.0, gen)
        with pytest.raises(ValueError):
            sample_univariate_tn(0.0, 1.0, 2.0, 1.0, gen)


class TestSweep:
    def test_preserves_feasibility(self, gen):
        k = 4
        q = np.linalg.inv(random_spd(k, gen))
        r = q @ gen.standard_normal(k)
        f = np.vstack([np.eye(k), -np.eye(k)])
        g = np.full(2 * k, 3.0)  # box |x_i| < 3
        x = np.zeros(k)
        for _ in range(500):
            constrained_gibbs_sweep(q, r, f, g, x, gen)
            assert np.all(f @ x + g > 0)

    def test_collapsed_interval_is_skipped(self, gen):
        q = np.eye(2)
        r = np.zeros(2)
        # coordinate 0 pinned into a sliver narrower than MIN_WIDTH
        eps = MIN_WIDTH / 4
        f = np.array([[1.0, 0.0], [-1.0, 0.0]])
        g = np.array([eps, eps])
        x = np.array([0.0, 5.0])
        skips = constrained_gibbs_sweep(q, r, f, g, x, gen)
        assert skips == 1
        assert x[0] == 0.0  # untouched
        assert x[1] != 5.0  # unconstrained coordinate moved

    def test_unconstrained_limit_matches_gaussian(self, gen):
        """With no active constraints the sweep is plain Gibbs on a Gaussian."""
        cov = np.array([[1.0, 0.7], [0.7, 2.0]])
        mu = np.array([0.5, -1.0])
        q = np.linalg.inv(cov)
        r = q @ mu
        f = np.zeros((1, 2))
        g = np.array([1.0])  # 0 x + 1 > 0 always
        x = mu.copy()
        draws = np.empty((30000, 2))
        for i in range(31000):
            constrained_gibbs_sweep(q, r, f, g, x, gen)
            if i >= 1000:
                draws[i - 1000] = x
        np.testing.assert_allclose(draws.mean(axis=0), mu, atol=0.05)
        np.testing.assert_allclose(np.cov(draws.T), cov, atol=0.12)

    def test_two_dim_against_rejection(self, gen):
        """Ordered pair from a correlated Gaussian: Gibbs vs rejection."""
        cov = np.array([[1.0, 0.5], [0.5, 1.5]])
        mu = np.array([0.0, 0.3])
        q = np.linalg.inv(cov)
        r = q @ mu
        f = np.array([[-1.0, 1.0]])  # x2 > x1
        g = np.zeros(1)

        raw = gen.multivariate_normal(mu, cov, size=200000)
        kept = raw[raw[:, 1] > raw[:, 0]]

        x = np.array([-0.5, 0.5])
        draws = np.empty((40000, 2))
        for i in range(42000):
            constrained_gibbs_sweep(q, r, f, g, x, gen)
            if i >= 2000:
                draws[i - 2000] = x
        se = kept.std(axis=0) / np.sqrt(len(draws) / 25)
        assert np.all(np.abs(draws.mean(axis=0) - kept.mean(axis=0)) < 4 * se)

    def test_deterministic_under_seed(self):
        q = np.eye(3)
        r = np.zeros(3)
        f = np.eye(3)
        g = np.ones(3)
        x1, x2 = np.zeros(3), np.zeros(3)
        constrained_gibbs_sweep(q, r, f, g, x1, RngStream(9, 1).generator)
        constrained_gibbs_sweep(q, r, f, g, x2, RngStream(9, 1).generator)
        np.testing.assert_array_equal(x1, x2)


class TestSpec:
    def test_step_respects_constraints(self, gen):
        k = 3
        cov = random_spd(k, gen)
        f = np.vstack([np.eye(k), [[-1.0, 1.0, 0.0]]])
        g = np.array([2.0, 2.0, 2.0, 1.0])
        start = np.zeros(k)
        spec = TruncatedNormalSpec(mean=np.zeros(k), cov=cov, f=f, g=g, current=start)
        for _ in range(200):
            out = sample_tmvn_step(spec, gen)
            assert np.all(f @ out + g > 0)

    def test_infeasible_start_rejected(self, gen):
        f = np.eye(2)
        g = np.zeros(2)
        with pytest.raises(ValueError):
            TruncatedNormalSpec(
                mean=np.zeros(2), cov=np.eye(2), f=f, g=g, current=np.array([-1.0, 1.0])
            )
