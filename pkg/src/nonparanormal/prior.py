"""Constrained Gaussian prior on spline coefficients and its reduction.

The coefficient vector of each transformation obeys two linear constraints
(value zero at 1/2, interquartile increment one), so the working prior lives
on the J - 2 free coefficients.  This module builds the constraint system,
conditions the Gaussian smoothness prior on it, and precomputes the affine
maps between the full and reduced coefficient spaces, including the
first-difference inequalities that keep the fitted spline increasing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numeric
from .splines import SplineBasis, eval_basis

__all__ = [
    "ConstructionError",
    "ConstraintSystem",
    "ReducedPrior",
    "zeta_vector",
    "build_constraints",
    "choose_removed_indices",
    "condition_prior",
    "reduce_prior",
    "build_reduced_prior",
    "reconstruct",
]

_TIE_TOL = 1e-12
_DET_TOL = 1e-12


class ConstructionError(ValueError):
    """Prior machinery could not be assembled for this basis."""


@dataclass(frozen=True)
class ConstraintSystem:
    a: np.ndarray  # (2, J): rows are B(1/2) and B(3/4) - B(1/4)
    c: np.ndarray  # (2,) = (0, 1)


@dataclass(frozen=True)
class ReducedPrior:
    """Prior over the free coefficients plus the affine reconstruction maps.

    ``lift @ theta_bar + shift`` rebuilds the full J-vector; ``w`` and ``q``
    are the two removed coefficients expressed in the free ones.  The
    monotonicity constraints become ``f_bar @ theta_bar + g_bar > 0``.
    """

    size: int
    j1: int
    j2: int
    kept: np.ndarray  # (J-2,) ascending indices of the free coefficients
    w: np.ndarray  # (2, J-2)
    q: np.ndarray  # (2,)
    xi_bar: np.ndarray  # (J-2,)
    gamma_bar: np.ndarray  # (J-2, J-2)
    lift: np.ndarray  # (J, J-2)
    shift: np.ndarray  # (J,)
    f_bar: np.ndarray  # (J-1, J-2)
    g_bar: np.ndarray  # (J-1,)
    gamma_bar_inv: np.ndarray
    gamma_bar_inv_xi: np.ndarray


def zeta_vector(size: int, nu: float = 0.0, tau: float = 1.0) -> np.ndarray:
    """Increasing prior center: nu + tau times evenly spaced normal scores."""
    if size < 1:
        raise ValueError("size must be positive")
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    ranks = (np.arange(1, size + 1) - 0.375) / (size + 0.25)
    return nu + tau * numeric.std_normal_quantile(ranks)


def build_constraints(basis: SplineBasis) -> ConstraintSystem:
    row_mid = eval_basis(basis, 0.5)
    row_iqr = eval_basis(basis, 0.75) - eval_basis(basis, 0.25)
    a = np.vstack([row_mid, row_iqr])
    return ConstraintSystem(a=a, c=np.array([0.0, 1.0]))


def _argmax_ties_low(v: np.ndarray) -> int:
    # smallest index within a tolerance band of the maximum
    top = float(np.max(v))
    return int(np.nonzero(v >= top - _TIE_TOL)[0][0])


def choose_removed_indices(cs: ConstraintSystem) -> tuple[int, int]:
    """Indices of the two coefficients eliminated by the constraints.

    The first maximizes the midpoint row, the second maximizes the
    interquartile row among the rest; ties resolve to the smaller index.
    If the resulting 2x2 block is numerically singular the second index
    advances to the next best candidate.
    """
    a = cs.a
    j1 = _argmax_ties_low(a[0])
    row = a[1].copy()
    row[j1] = -np.inf
    order = np.argsort(-row, kind="stable")
    for j2 in order:
        j2 = int(j2)
        if j2 == j1 or not np.isfinite(row[j2]):
            continue
        det = a[0, j1] * a[1, j2] - a[0, j2] * a[1, j1]
        if abs(det) > _DET_TOL:
            return j1, j2
    raise ConstructionError("no invertible pair of removable coefficients")


def condition_prior(
    zeta: np.ndarray, sigma2: float, cs: ConstraintSystem
) -> tuple[np.ndarray, np.ndarray]:
    """Moments of N(zeta, sigma2 * I) conditioned on the linear constraints."""
    if sigma2 <= 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    a, c = cs.a, cs.c
    gram = a @ a.T
    pull = a.T @ numeric.solve_spd(gram, np.eye(2))  # A^T (A A^T)^{-1}
    xi = zeta + pull @ (c - a @ zeta)
    gamma = sigma2 * (np.eye(a.shape[1]) - pull @ a)
    return xi, 0.5 * (gamma + gamma.T)


def _difference_matrix(size: int) -> np.ndarray:
    f = np.zeros((size - 1, size))
    idx = np.arange(size - 1)
    f[idx, idx] = -1.0
    f[idx, idx + 1] = 1.0
    return f


def reduce_prior(
    xi: np.ndarray,
    gamma: np.ndarray,
    cs: ConstraintSystem,
    j1: int,
    j2: int,
) -> ReducedPrior:
    """Project the conditioned prior onto the free coefficients.

    The removed pair (j1, j2) is recovered as ``w @ theta_bar + q``; the
    prior of the free block is the corresponding marginal, which is proper.
    """
    size = xi.shape[0]
    kept = np.array([j for j in range(size) if j not in (j1, j2)], dtype=np.int64)
    a_r = cs.a[:, [j1, j2]]
    a_s = cs.a[:, kept]
    det = a_r[0, 0] * a_r[1, 1] - a_r[0, 1] * a_r[1, 0]
    if abs(det) <= _DET_TOL:
        raise ConstructionError(f"removed block ({j1}, {j2}) is singular")
    a_r_inv = np.array([[a_r[1, 1], -a_r[0, 1]], [-a_r[1, 0], a_r[0, 0]]]) / det
    w = -a_r_inv @ a_s
    q = a_r_inv @ cs.c

    lift = np.zeros((size, size - 2))
    lift[kept, np.arange(size - 2)] = 1.0
    lift[j1] = w[0]
    lift[j2] = w[1]
    shift = np.zeros(size)
    shift[j1] = q[0]
    shift[j2] = q[1]

    xi_bar = xi[kept]
    gamma_bar = gamma[np.ix_(kept, kept)]
    try:
        numeric.check_spd(gamma_bar)
    except numeric.FactorizationError:
        jitter = 1e-10 * np.trace(gamma_bar) / gamma_bar.shape[0]
        gamma_bar = gamma_bar + jitter * np.eye(gamma_bar.shape[0])
        numeric.check_spd(gamma_bar)

    diff = _difference_matrix(size)
    f_bar = diff @ lift
    g_bar = diff @ shift
    gamma_bar_inv = numeric.inv_spd(gamma_bar)
    return ReducedPrior(
        size=size,
        j1=int(j1),
        j2=int(j2),
        kept=kept,
        w=w,
        q=q,
        xi_bar=xi_bar,
        gamma_bar=gamma_bar,
        lift=lift,
        shift=shift,
        f_bar=f_bar,
        g_bar=g_bar,
        gamma_bar_inv=gamma_bar_inv,
        gamma_bar_inv_xi=gamma_bar_inv @ xi_bar,
    )


def build_reduced_prior(
    basis: SplineBasis, nu: float = 0.0, tau: float = 1.0, sigma2: float = 1.0
) -> ReducedPrior:
    """Full pipeline from a basis to the reduced constrained prior."""
    zeta = zeta_vector(basis.size, nu=nu, tau=tau)
    cs = build_constraints(basis)
    j1, j2 = choose_removed_indices(cs)
    xi, gamma = condition_prior(zeta, sigma2, cs)
    return reduce_prior(xi, gamma, cs, j1, j2)


def reconstruct(red: ReducedPrior, theta_bar: np.ndarray) -> np.ndarray:
    """Rebuild the full coefficient vector from the free block."""
    theta_bar = np.asarray(theta_bar, dtype=float)
    if theta_bar.shape != (red.size - 2,):
        raise ValueError(
            f"free coefficient vector has shape {theta_bar.shape}, "
            f"expected ({red.size - 2},)"
        )
    return red.lift @ theta_bar + red.shift
