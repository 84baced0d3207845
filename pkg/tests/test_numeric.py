"""Linear algebra and distribution helpers against independent references."""

import mpmath
import numpy as np
import pytest
import scipy.linalg
import scipy.stats

from nonparanormal.numeric import (
    FactorizationError,
    RngStream,
    check_spd,
    cholesky_lower,
    inv_spd,
    mvn_logpdf,
    sample_beta,
    sample_bernoulli,
    sample_mvn,
    sample_wishart,
    solve_spd,
    std_normal_cdf,
    std_normal_quantile,
)
from conftest import random_spd


class TestCholesky:
    def test_matches_scipy_on_random_spd(self, gen):
        for p in (1, 2, 5, 12):
            m = random_spd(p, gen)
            ours = cholesky_lower(m)
            ref = scipy.linalg.cholesky(m, lower=True)
            np.testing.assert_allclose(ours, ref, rtol=1e-10, atol=1e-12)

    def test_reports_failing_pivot(self):
        m = np.diag([1.0, 1.0, -2.0])
        with pytest.raises(FactorizationError) as err:
            cholesky_lower(m)
        assert err.value.pivot_index == 2
        assert err.value.pivot_value <= 0.0

    def test_indefinite_matrix_rejected(self, gen):
        a = gen.standard_normal((4, 4))
        m = a + a.T
        m -= (np.linalg.eigvalsh(m).max() + 1.0) * np.eye(4)  # force indefinite
        with pytest.raises(FactorizationError):
            cholesky_lower(m)


class TestCheckSpd:
    def test_returns_cholesky_of_symmetrized_input(self, gen):
        m = random_spd(3, gen)
        m[0, 1] += 1e-12  # below tolerance
        low = check_spd(m)
        np.testing.assert_allclose(low @ low.T, 0.5 * (m + m.T), rtol=1e-12)
        assert np.allclose(low, np.tril(low))

    def test_rejects_asymmetric(self):
        m = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ValueError, match="not symmetric"):
            check_spd(m)

    def test_rejects_non_positive(self):
        with pytest.raises(FactorizationError):
            check_spd(np.diag([1.0, 0.0]))


class TestSolvers:
    def test_solve_matches_numpy(self, gen):
        m = random_spd(6, gen)
        b = gen.standard_normal((6, 3))
        np.testing.assert_allclose(solve_spd(m, b), np.linalg.solve(m, b), rtol=1e-9)

    def test_inverse_roundtrip(self, gen):
        m = random_spd(5, gen)
        np.testing.assert_allclose(inv_spd(m) @ m, np.eye(5), atol=1e-9)


class TestNormalFunctions:
    """High-precision oracle: mpmath's erfc-based normal CDF."""

    POINTS = (-8.0, -3.5, -1.0, -0.1, 0.0, 0.3, 1.0, 4.2, 7.5)

    def test_cdf_against_mpmath(self):
        mpmath.mp.dps = 40
        for x in self.POINTS:
            ref = float(mpmath.ncdf(x))
            got = float(std_normal_cdf(x))
            assert got == pytest.approx(ref, rel=1e-13, abs=1e-300)

    def test_quantile_inverts_cdf(self):
        for x in (-5.0, -1.3, 0.0, 0.7, 2.0, 5.0):
            u = float(std_normal_cdf(x))
            assert float(std_normal_quantile(u)) == pytest.approx(x, abs=1e-9)

    def test_quantile_against_mpmath_tails(self):
        mpmath.mp.dps = 50
        for u in (1e-12, 1e-6, 0.2, 0.5, 0.9, 1 - 1e-9):
            ref = float(mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(u) - 1))
            assert float(std_normal_quantile(u)) == pytest.approx(ref, rel=1e-10, abs=1e-12)

    def test_quantile_domain(self):
        assert float(std_normal_quantile(0.0)) == -np.inf
        assert float(std_normal_quantile(1.0)) == np.inf
        for bad in (-0.5, 2.0):
            with pytest.raises(ValueError):
                std_normal_quantile(bad)


class TestMvnLogpdf:
    def test_matches_scipy(self, gen):
        for p in (1, 3, 7):
            mean = gen.standard_normal(p)
            cov = random_spd(p, gen)
            y = gen.standard_normal((40, p))
            ref = scipy.stats.multivariate_normal.logpdf(y, mean, cov)
            np.testing.assert_allclose(mvn_logpdf(y, mean, cov), np.atleast_1d(ref), rtol=1e-9)

    def test_single_row(self, gen):
        mean = np.zeros(2)
        cov = np.eye(2)
        got = mvn_logpdf(np.zeros((1, 2)), mean, cov)
        assert got.shape == (1,)
        assert got[0] == pytest.approx(-np.log(2 * np.pi), rel=1e-12)


class TestSamplers:
    def test_mvn_moments(self, gen):
        mean = np.array([1.0, -2.0])
        cov = np.array([[2.0, 0.6], [0.6, 1.0]])
        draws = np.array([sample_mvn(mean, cov, gen) for _ in range(20000)])
        np.testing.assert_allclose(draws.mean(axis=0), mean, atol=0.05)
        np.testing.assert_allclose(np.cov(draws.T), cov, atol=0.08)

    def test_wishart_mean_identity(self, gen):
        """Empirical mean of W(df, V) draws approaches df * V."""
        scale = random_spd(3, gen)
        df = 9.0
        total = np.zeros((3, 3))
        ndraw = 10000
        for _ in range(ndraw):
            total += sample_wishart(df, scale, gen)
        rel = np.abs(total / ndraw - df * scale) / np.abs(df * scale)
        assert rel.max() < 0.05

    def test_wishart_needs_enough_df(self, gen):
        with pytest.raises(ValueError):
            sample_wishart(1.5, np.eye(3), gen)

    def test_beta_and_bernoulli(self, gen):
        vals = [sample_beta(3.0, 7.0, gen) for _ in range(4000)]
        assert np.mean(vals) == pytest.approx(0.3, abs=0.02)
        flips = sample_bernoulli(np.full(4000, 0.25), gen)
        assert set(np.unique(flips)) <= {0, 1}
        assert flips.mean() == pytest.approx(0.25, abs=0.03)


class TestRngStream:
    def test_same_key_same_draws(self):
        a = RngStream(11, 4).generator.standard_normal(5)
        b = RngStream(11, 4).generator.standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(11, 0).generator.standard_normal(5)
        b = RngStream(11, 1).generator.standard_normal(5)
        c = RngStream(12, 0).generator.standard_normal(5)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_substream_is_distinct(self):
        base = RngStream(3, 2)
        sub = base.substream(0)
        assert (sub.seed, sub.stream_id) != (base.seed, base.stream_id)
        a = base.generator.standard_normal(4)
        b = sub.generator.standard_normal(4)
        assert not np.array_equal(a, b)
