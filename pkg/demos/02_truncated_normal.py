"""Sampling Gaussians under interval and linear inequality constraints.

Run with: python3 demos/02_truncated_normal.py
"""

import numpy as np

from nonparanormal.numeric import RngStream, inv_spd
from nonparanormal.tmvn import constrained_gibbs_sweep, sample_univariate_tn

rng = RngStream(2024, 0)

print("univariate truncations of N(0, 1):")
for lo, hi in [(-1.0, 1.0), (2.5, np.inf), (-np.inf, -4.0), (0.30, 0.31)]:
    draws = np.array([sample_univariate_tn(0.0, 1.0, lo, hi, rng) for _ in range(4000)])
    print(
        f"  ({lo:>6} , {hi:>6}): mean {draws.mean():+.3f}, sd {draws.std(ddof=1):.3f}, "
        f"range [{draws.min():+.3f}, {draws.max():+.3f}]"
    )

# a correlated trivariate Gaussian restricted to the ordered cone x1 < x2 < x3
cov = 0.6 ** np.abs(np.subtract.outer(np.arange(3), np.arange(3)))
mean = np.array([0.0, 0.2, 0.4])
q = inv_spd(cov)
r = q @ mean
f = np.array([[-1.0, 1.0, 0.0], [0.0, -1.0, 1.0]])
g = np.zeros(2)

x = np.array([-0.5, 0.0, 0.5])  # strictly feasible start
for _ in range(500):
    constrained_gibbs_sweep(q, r, f, g, x, rng)
kept = np.empty((8000, 3))
for i in range(8000):
    constrained_gibbs_sweep(q, r, f, g, x, rng)
    kept[i] = x

print("\ntrivariate Gaussian restricted to x1 < x2 < x3:")
print(f"  unconstrained mean: {mean}")
print(f"  constrained mean:   {np.round(kept.mean(axis=0), 3)}")
print(f"  every draw ordered: {bool(np.all(np.diff(kept, axis=1) > 0))}")

# compare against brute-force rejection from the same distribution
oracle_gen = np.random.default_rng(99)
block = oracle_gen.multivariate_normal(mean, cov, size=200_000)
accepted = block[np.all(np.diff(block, axis=1) > 0, axis=1)]
print(f"  rejection oracle mean: {np.round(accepted.mean(axis=0), 3)} "
      f"(from {accepted.shape[0]} accepted draws)")
