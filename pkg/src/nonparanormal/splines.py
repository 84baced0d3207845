"""Cubic B-spline basis on [0, 1] with clamped equispaced knots.

A basis of size J uses order 4 (degree 3) splines whose knot vector repeats
0 and 1 four times with J - 4 equispaced interior knots, so the J basis
functions form a partition of unity on the closed interval.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ORDER", "SplineBasis", "cubic_basis", "eval_basis", "eval_basis_rows", "eval_function"]

ORDER = 4  # cubic


@dataclass(frozen=True)
class SplineBasis:
    size: int
    knots: np.ndarray  # length size + ORDER

    def __post_init__(self):
        if self.knots.shape != (self.size + ORDER,):
            raise ValueError("knot vector length must be size + 4")


def cubic_basis(size: int) -> SplineBasis:
    """Basis of ``size`` cubic B-splines on [0, 1].

    ``size`` must be at least 5 so that both identifiability constraints
    touch distinct basis functions.
    """
    if size < 5:
        raise ValueError(f"basis size must be >= 5, got {size}")
    interior = np.linspace(0.0, 1.0, size - ORDER + 2)[1:-1]
    knots = np.concatenate([np.zeros(ORDER), interior, np.ones(ORDER)])
    return SplineBasis(size=int(size), knots=knots)


def _find_spans(knots: np.ndarray, size: int, x: np.ndarray) -> np.ndarray:
    # last index k with knots[k] <= x, clamped so every point (including the
    # endpoints) falls in a nonempty span [knots[k], knots[k+1])
    spans = np.searchsorted(knots, x, side="right") - 1
    return np.clip(spans, ORDER - 1, size - 1)


def eval_basis_rows(basis: SplineBasis, x) -> np.ndarray:
    """Evaluate all basis functions at each point of ``x``.

    Returns an (n, J) matrix whose rows sum to one.  Points outside [0, 1]
    raise ValueError.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ValueError("expected a one-dimensional array of points")
    if np.any(x < 0.0) or np.any(x > 1.0) or np.any(np.isnan(x)):
        raise ValueError("evaluation points must lie in [0, 1]")
    knots = basis.knots
    n = x.shape[0]
    spans = _find_spans(knots, basis.size, x)

    # Cox-de Boor triangle, vectorized over points
    vals = np.zeros((n, ORDER))
    vals[:, 0] = 1.0
    left = np.zeros((n, ORDER))
    right = np.zeros((n, ORDER))
    for r in range(1, ORDER):
        left[:, r] = x - knots[spans + 1 - r]
        right[:, r] = knots[spans + r] - x
        saved = np.zeros(n)
        for s in range(r):
            denom = right[:, s + 1] + left[:, r - s]
            tmp = vals[:, s] / denom
            vals[:, s] = saved + right[:, s + 1] * tmp
            saved = left[:, r - s] * tmp
        vals[:, r] = saved

    out = np.zeros((n, basis.size))
    cols = spans[:, None] + np.arange(-(ORDER - 1), 1)[None, :]
    np.put_along_axis(out, cols, vals, axis=1)
    return out


def eval_basis(basis: SplineBasis, x: float) -> np.ndarray:
    """Vector of all J basis functions at a single point."""
    return eval_basis_rows(basis, [float(x)])[0]


def eval_function(basis: SplineBasis, coeffs: np.ndarray, x) -> np.ndarray:
    """Evaluate the spline with the given coefficient vector at ``x``."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (basis.size,):
        raise ValueError(
            f"coefficient vector has length {coeffs.shape}, expected ({basis.size},)"
        )
    return eval_basis_rows(basis, x) @ coeffs
