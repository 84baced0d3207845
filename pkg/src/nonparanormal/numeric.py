"""Shared numeric primitives: seedable RNG streams, dense linear algebra
helpers, the standard normal CDF/quantile pair, and parametric samplers.

Everything downstream draws randomness through :class:`RngStream` so that a
(seed, stream_id) pair pins the whole computation bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "FactorizationError",
    "RngStream",
    "cholesky_lower",
    "check_spd",
    "solve_spd",
    "inv_spd",
    "std_normal_cdf",
    "std_normal_quantile",
    "mvn_logpdf",
    "sample_mvn",
    "sample_wishart",
    "sample_beta",
    "sample_bernoulli",
]


class FactorizationError(ValueError):
    """Cholesky factorization hit a nonpositive pivot.

    Attributes
    ----------
    pivot_index : int
        Zero-based row/column of the first failing pivot.
    pivot_value : float
        The offending diagonal value after elimination.
    """

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = int(pivot_index)
        self.pivot_value = float(pivot_value)
        super().__init__(
            f"matrix is not positive definite: pivot {self.pivot_index} "
            f"is {self.pivot_value:.6g}"
        )


@dataclass
class RngStream:
    """A named substream of a seeded PCG64 generator.

    Distinct ``stream_id`` values under the same ``seed`` give statistically
    independent streams; identical pairs reproduce identical draws.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence((int(self.seed), int(self.stream_id)))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def substream(self, k: int) -> "RngStream":
        """A fresh stream keyed off this stream's id (never shares state)."""
        return RngStream(self.seed, (self.stream_id << 16) + k + 1)


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def cholesky_lower(m: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive definite matrix.

    Raises :class:`FactorizationError` carrying the index of the first
    nonpositive pivot.  The fast path defers to LAPACK; the slow scan only
    runs to locate the pivot after a failure.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        pass
    # locate the failing pivot with a plain column-by-column elimination
    n = m.shape[0]
    low = np.zeros((n, n))
    for j in range(n):
        d = m[j, j] - low[j, :j] @ low[j, :j]
        if not d > 0.0:  # catches nan as well
            raise FactorizationError(j, d)
        low[j, j] = np.sqrt(d)
        if j + 1 < n:
            low[j + 1 :, j] = (m[j + 1 :, j] - low[j + 1 :, :j] @ low[j, :j]) / low[j, j]
    return low  # pragma: no cover - unreachable when LAPACK failed honestly


def check_spd(m: np.ndarray, sym_tol: float = 1e-8) -> np.ndarray:
    """Validate symmetry (relative tolerance) and positive definiteness.

    Returns the lower Cholesky factor so callers can reuse it.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max()))
    asym = float(np.abs(m - m.T).max())
    if asym > sym_tol * scale:
        raise ValueError(f"matrix is not symmetric: max asymmetry {asym:.3g}")
    return cholesky_lower(0.5 * (m + m.T))


def solve_spd(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve m @ x = b for symmetric positive definite m."""
    low = cholesky_lower(m)
    y = np.linalg.solve(low, b)
    return np.linalg.solve(low.T, y)


def inv_spd(m: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    inv = solve_spd(m, np.eye(np.asarray(m).shape[0]))
    return 0.5 * (inv + inv.T)


def std_normal_cdf(x):
    """Standard normal CDF, accurate to well below 1e-8 absolute error."""
    return ndtr(np.asarray(x, dtype=float))


def std_normal_quantile(u):
    """Standard normal quantile; domain (0, 1), endpoints map to +-inf."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("quantile argument outside [0, 1]")
    return ndtri(u)


def mvn_logpdf(y: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Log density of N(mean, cov) evaluated at the rows of y."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    mean = np.asarray(mean, dtype=float)
    p = mean.shape[0]
    if y.shape[1] != p:
        raise ValueError(f"point dimension {y.shape[1]} != mean dimension {p}")
    low = cholesky_lower(cov)
    z = np.linalg.solve(low, (y - mean).T)  # (p, n)
    quad = np.sum(z * z, axis=0)
    logdet = 2.0 * np.sum(np.log(np.diag(low)))
    return -0.5 * (p * np.log(2.0 * np.pi) + logdet + quad)


def sample_mvn(mean: np.ndarray, cov: np.ndarray, rng) -> np.ndarray:
    """One draw from N(mean, cov) via the lower Cholesky factor."""
    gen = _as_rng(rng)
    mean = np.asarray(mean, dtype=float)
    low = cholesky_lower(cov)
    return mean + low @ gen.standard_normal(mean.shape[0])


def sample_wishart(df: float, scale: np.ndarray, rng) -> np.ndarray:
    """One Wishart(df, scale) draw by the Bartlett decomposition.

    Requires df >= p; the expectation is df * scale.
    """
    gen = _as_rng(rng)
    scale = np.asarray(scale, dtype=float)
    p = scale.shape[0]
    if df < p:
        raise ValueError(f"wishart degrees of freedom {df} below dimension {p}")
    low = cholesky_lower(scale)
    a = np.zeros((p, p))
    for i in range(p):
        a[i, i] = np.sqrt(gen.chisquare(df - i))
        if i > 0:
            a[i, :i] = gen.standard_normal(i)
    la = low @ a
    return la @ la.T


def sample_beta(a: float, b: float, rng) -> float:
    """One Beta(a, b) draw; both shape parameters must be positive."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"beta shape parameters must be positive, got ({a}, {b})")
    return float(_as_rng(rng).beta(a, b))


def sample_bernoulli(prob, rng) -> np.ndarray:
    """Vector of Bernoulli(prob) draws as integers in {0, 1}."""
    prob = np.asarray(prob, dtype=float)
    if np.any(prob < 0.0) or np.any(prob > 1.0):
        raise ValueError("bernoulli probability outside [0, 1]")
    return (_as_rng(rng).random(prob.shape) < prob).astype(np.int64)
