"""Sampling from multivariate normals restricted by linear inequalities.

The workhorse is a coordinate-at-a-time Gibbs sweep: each coordinate's full
conditional is a univariate truncated normal whose interval comes from the
active rows of ``f @ x + g > 0``.  Univariate draws invert the CDF on the
side where it is small; intervals entirely beyond four standard deviations
use an exponential-proposal rejection sampler instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from . import numeric
from .numeric import _as_rng

__all__ = [
    "TAIL_CUT",
    "MIN_WIDTH",
    "TruncatedNormalSpec",
    "sample_univariate_tn",
    "sample_tmvn_step",
    "constrained_gibbs_sweep",
]

TAIL_CUT = 4.0  # standardized bound beyond which rejection sampling takes over
MIN_WIDTH = 1e-14  # narrower conditional intervals are skipped, not sampled


def _clamp_open(x: float, lo: float, hi: float) -> float:
    if x <= lo:
        x = np.nextafter(lo, np.inf)
    if x >= hi:
        x = np.nextafter(hi, -np.inf)
    return float(x)


def _tail_std_tn(a: float, b: float, gen: np.random.Generator) -> float:
    # interval entirely in the upper tail (a >= TAIL_CUT); exponential
    # proposal tilted at the optimal rate, per the classic tail algorithm
    alpha = 0.5 * (a + math.sqrt(a * a + 4.0))
    for _ in range(10000):
        z = a - math.log1p(-gen.random()) / alpha
        if z >= b:
            continue
        d = z - alpha
        if math.log(gen.random() or 5e-324) <= -0.5 * d * d:
            return z
    # pathologically narrow interval: invert the complementary CDF instead
    qa = float(ndtr(-a))
    qb = float(ndtr(-b)) if np.isfinite(b) else 0.0
    u = qb + (qa - qb) * gen.random()
    z = float(-ndtri(max(u, 5e-324)))
    return _clamp_open(z, a, b)


def _central_std_tn(a: float, b: float, gen: np.random.Generator) -> float:
    # a + b <= 0 here, so both CDF values sit in the well-resolved left half
    pa = float(ndtr(a))
    pb = float(ndtr(b))
    u = pa + (pb - pa) * gen.random()
    x = float(ndtri(min(max(u, 5e-324), 1.0 - 1e-16)))
    return _clamp_open(x, a, b)


def _std_tn(a: float, b: float, gen: np.random.Generator) -> float:
    if a >= TAIL_CUT:
        return _tail_std_tn(a, b, gen)
    if b <= -TAIL_CUT:
        return -_tail_std_tn(-b, -a, gen)
    if -a < b:  # equivalent to a + b > 0, but safe when both ends are infinite
        return -_central_std_tn(-b, -a, gen)
    return _central_std_tn(a, b, gen)


def sample_univariate_tn(mean: float, var: float, lower: float, upper: float, rng) -> float:
    """One draw from N(mean, var) truncated to the open interval (lower, upper).

    The returned value lies strictly inside the interval.  ``lower`` may be
    -inf and ``upper`` may be +inf; an empty interval raises ValueError.
    """
    gen = _as_rng(rng)
    if not var > 0.0:
        raise ValueError(f"variance must be positive, got {var}")
    if not lower < upper:
        raise ValueError(f"empty truncation interval ({lower}, {upper})")
    sd = math.sqrt(var)
    a = (lower - mean) / sd
    b = (upper - mean) / sd
    z = _std_tn(a, b, gen)
    return _clamp_open(mean + sd * z, lower, upper)


def constrained_gibbs_sweep(
    q: np.ndarray,
    r: np.ndarray,
    f: np.ndarray,
    g: np.ndarray,
    x: np.ndarray,
    rng,
) -> int:
    """One full coordinate sweep of the Gaussian with natural parameters
    (q, r) restricted to ``f @ x + g > 0``; updates ``x`` in place.

    Returns the number of coordinates skipped because their conditional
    interval collapsed below MIN_WIDTH.  ``x`` must be strictly feasible on
    entry; feasibility is preserved.
    """
    gen = _as_rng(rng)
    k = x.shape[0]
    slack = f @ x + g
    skips = 0
    for j in range(k):
        qjj = q[j, j]
        if not qjj > 0.0:
            raise ValueError(f"conditional precision for coordinate {j} is {qjj}")
        fj = f[:, j]
        base = slack - fj * x[j]
        lo, hi = -np.inf, np.inf
        pos = fj > 0.0
        if pos.any():
            lo = float(np.max(-base[pos] / fj[pos]))
        neg = fj < 0.0
        if neg.any():
            hi = float(np.min(-base[neg] / fj[neg]))
        if not hi - lo > MIN_WIDTH:  # also catches inverted or nan bounds
            skips += 1
            continue
        m = (r[j] - (q[j] @ x - qjj * x[j])) / qjj
        xj = sample_univariate_tn(m, 1.0 / qjj, lo, hi, gen)
        x[j] = xj
        slack = base + fj * xj  # rebuilt from base, no incremental drift
    return skips


@dataclass
class TruncatedNormalSpec:
    """A target N(mean, cov) restricted to ``f @ x + g > 0`` plus the
    sampler's current point and skip diagnostics."""

    mean: np.ndarray
    cov: np.ndarray
    f: np.ndarray
    g: np.ndarray
    current: np.ndarray
    precision: np.ndarray = field(init=False, repr=False)
    shift: np.ndarray = field(init=False, repr=False)
    degenerate_skips: int = 0

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        self.f = np.atleast_2d(np.asarray(self.f, dtype=float))
        self.g = np.asarray(self.g, dtype=float)
        self.current = np.array(self.current, dtype=float)
        k = self.mean.shape[0]
        if self.cov.shape != (k, k):
            raise ValueError(f"covariance shape {self.cov.shape} does not match dimension {k}")
        if self.f.shape[1] != k or self.g.shape != (self.f.shape[0],):
            raise ValueError("constraint shapes do not match the dimension")
        if self.current.shape != (k,):
            raise ValueError("starting point has the wrong shape")
        numeric.check_spd(self.cov)
        self.precision = numeric.inv_spd(self.cov)
        self.shift = self.precision @ self.mean
        if self.f.shape[0] and not np.all(self.f @ self.current + self.g > 0.0):
            raise ValueError("starting point violates the constraints")


def sample_tmvn_step(spec: TruncatedNormalSpec, rng) -> np.ndarray:
    """Advance the spec's current point by one full Gibbs sweep."""
    spec.degenerate_skips += constrained_gibbs_sweep(
        spec.precision, spec.shift, spec.f, spec.g, spec.current, rng
    )
    return spec.current.copy()
