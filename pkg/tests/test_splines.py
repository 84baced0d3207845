"""Cubic B-spline basis behavior, checked against scipy's own evaluator."""

import numpy as np
import pytest
from scipy.interpolate import BSpline

from nonparanormal.splines import (
    ORDER,
    cubic_basis,
    eval_basis,
    eval_basis_rows,
    eval_function,
)


def scipy_design(basis, x):
    """Independent evaluation of every basis function via scipy.interpolate."""
    cols = []
    for j in range(basis.size):
        coeff = np.zeros(basis.size)
        coeff[j] = 1.0
        spl = BSpline(basis.knots, coeff, ORDER - 1, extrapolate=False)
        cols.append(spl(x))
    out = np.column_stack(cols)
    # scipy returns nan at the right endpoint of a clamped spline; the
    # last basis function equals one there by continuity.
    at_end = np.asarray(x) == basis.knots[-1]
    if np.any(at_end):
        out[at_end] = 0.0
        out[at_end, -1] = 1.0
    return np.nan_to_num(out)


class TestConstruction:
    def test_knot_layout(self):
        b = cubic_basis(8)
        assert b.knots[0] == 0.0 and b.knots[-1] == 1.0
        assert np.all(b.knots[:4] == 0.0) and np.all(b.knots[-4:] == 1.0)
        interior = b.knots[4:-4]
        np.testing.assert_allclose(np.diff(interior), interior[1] - interior[0])
        assert len(b.knots) == b.size + ORDER

    def test_minimum_size(self):
        cubic_basis(5)
        with pytest.raises(ValueError):
            cubic_basis(4)


class TestEvaluation:
    @pytest.mark.parametrize("size", [5, 6, 8, 12, 15])
    def test_matches_scipy(self, size):
        basis = cubic_basis(size)
        x = np.linspace(0.0, 1.0, 357)
        ref = scipy_design(basis, x)
        np.testing.assert_allclose(eval_basis_rows(basis, x), ref, atol=1e-12)

    def test_partition_of_unity(self):
        for size in (5, 8, 15):
            basis = cubic_basis(size)
            rows = eval_basis_rows(basis, np.linspace(0, 1, 1000))
            assert np.max(np.abs(rows.sum(axis=1) - 1.0)) < 1e-12

    def test_nonnegative_and_local(self):
        basis = cubic_basis(10)
        rows = eval_basis_rows(basis, np.linspace(0, 1, 200))
        assert rows.min() >= 0.0
        # cubic pieces: no more than ORDER basis functions active anywhere
        assert np.max((rows > 1e-14).sum(axis=1)) <= ORDER

    def test_scalar_matches_rows(self):
        basis = cubic_basis(7)
        for x in (0.0, 0.31, 0.5, 0.99, 1.0):
            np.testing.assert_allclose(eval_basis(basis, x), eval_basis_rows(basis, [x])[0])

    def test_domain_enforced(self):
        basis = cubic_basis(6)
        for bad in (-0.01, 1.01, np.nan):
            with pytest.raises(ValueError):
                eval_basis_rows(basis, [bad])


class TestFunctionEval:
    def test_linear_coefficient_identity(self, gen):
        """Increasing coefficients produce an increasing spline."""
        basis = cubic_basis(9)
        theta = np.sort(gen.standard_normal(9))
        theta += np.arange(9) * 1e-3  # strictly increasing
        grid = np.linspace(0, 1, 400)
        vals = eval_function(basis, theta, grid)
        assert np.all(np.diff(vals) > -1e-13)

    def test_against_scipy_spline_object(self, gen):
        basis = cubic_basis(11)
        theta = gen.standard_normal(11)
        grid = np.linspace(0, 1, 97)
        ref = BSpline(basis.knots, theta, ORDER - 1, extrapolate=False)(grid)
        ref[-1] = theta[-1]  # clamped right endpoint
        np.testing.assert_allclose(eval_function(basis, theta, grid), ref, atol=1e-12)
