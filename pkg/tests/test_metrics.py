"""Confusion counting and derived rates against hand-worked examples."""

import math

import numpy as np
import pytest

from nonparanormal.metrics import (
    ConfusionCounts,
    confusion,
    format_table,
    mean_rates,
    rates,
)


class TestConfusion:
    def test_counts(self):
        true_l = [1, 1, 0, 0, 1, 0]
        pred = [1, 0, 0, 1, 1, 0]
        c = confusion(true_l, pred)
        assert (c.tp, c.tn, c.fp, c.fn) == (2, 2, 1, 1)
        assert c.total == 6

    def test_rejects_stray_values(self):
        with pytest.raises(ValueError):
            confusion([0, 1, 2], [0, 1, 1])
        with pytest.raises(ValueError):
            confusion([0, 1], [0, -1])
        with pytest.raises(ValueError):
            confusion([0, 1], [0])


class TestRates:
    def test_worked_example(self):
        c = ConfusionCounts(tp=50, tn=40, fp=5, fn=5)
        r = rates(c)
        assert r.fpr == pytest.approx(5 / 45)
        assert r.fnr == pytest.approx(5 / 55)
        assert r.error == pytest.approx(10 / 100)
        num = 50 * 40 - 5 * 5
        den = math.sqrt((50 + 5) * (50 + 5) * (40 + 5) * (40 + 5))
        assert r.mcc == pytest.approx(num / den)

    def test_no_negatives_present(self):
        r = rates(ConfusionCounts(tp=30, tn=0, fp=0, fn=10))
        assert math.isnan(r.fpr)  # no true class-0 rows to false-alarm on
        assert r.fnr == pytest.approx(0.25)
        assert r.mcc == 0.0  # degenerate denominator convention

    def test_no_positives_present(self):
        r = rates(ConfusionCounts(tp=0, tn=20, fp=5, fn=0))
        assert math.isnan(r.fnr)
        assert r.fpr == pytest.approx(0.2)
        assert r.mcc == 0.0

    def test_perfect_prediction(self):
        r = rates(ConfusionCounts(tp=10, tn=10, fp=0, fn=0))
        assert (r.fpr, r.fnr, r.error, r.mcc) == (0.0, 0.0, 0.0, 1.0)

    def test_total_inversion(self):
        r = rates(ConfusionCounts(tp=0, tn=0, fp=7, fn=3))
        assert r.error == 1.0
        assert r.mcc == -1.0

    def test_class_swap_leaves_symmetric_scores(self, gen):
        true_l = gen.integers(0, 2, size=60)
        pred = gen.integers(0, 2, size=60)
        a = rates(confusion(true_l, pred))
        b = rates(confusion(1 - true_l, 1 - pred))
        assert a.error == pytest.approx(b.error)
        assert a.mcc == pytest.approx(b.mcc)
        assert a.fpr == pytest.approx(b.fnr)


class TestAggregation:
    def test_mean_skips_undefined_rates(self):
        r1 = rates(ConfusionCounts(tp=30, tn=0, fp=0, fn=10))   # fpr undefined
        r2 = rates(ConfusionCounts(tp=20, tn=15, fp=5, fn=10))
        m = mean_rates([r1, r2])
        assert m.fpr == pytest.approx(5 / 20)  # only the defined entry
        assert m.fnr == pytest.approx((10 / 40 + 10 / 30) / 2)
        assert m.error == pytest.approx((10 / 40 + 15 / 50) / 2)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError):
            mean_rates([])


class TestTable:
    def test_nan_rendering(self):
        text = format_table(["a", "b"], [[1.0, float("nan")], [22.5, 0.125]])
        assert "n/a" in text
        assert "0.125" in text
        assert text.splitlines()[0].strip().startswith("a")
