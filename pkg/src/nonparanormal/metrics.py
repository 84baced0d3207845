"""Binary classification error summaries with explicit zero-count rules.

Conventions: a zero denominator makes fpr or fnr undefined (NaN, excluded
from aggregation); an undefined Matthews coefficient is reported as 0.
Class 1 is the positive class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = ["ConfusionCounts", "Rates", "confusion", "rates", "mean_rates", "format_table"]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class Rates:
    fpr: float
    fnr: float
    error: float
    mcc: float


def confusion(true_labels, pred_labels) -> ConfusionCounts:
    """Count the four cells; labels must be 0/1 vectors of equal length."""
    t = np.asarray(true_labels)
    q = np.asarray(pred_labels)
    if t.shape != q.shape or t.ndim != 1:
        raise ValueError("label vectors must be one-dimensional and equally long")
    if t.shape[0] == 0:
        raise ValueError("cannot build a confusion matrix from zero rows")
    for name, v in (("true", t), ("predicted", q)):
        if not np.all(np.isin(v, (0, 1))):
            raise ValueError(f"{name} labels must all be 0 or 1")
    tp = int(np.sum((t == 1) & (q == 1)))
    tn = int(np.sum((t == 0) & (q == 0)))
    fp = int(np.sum((t == 0) & (q == 1)))
    fn = int(np.sum((t == 1) & (q == 0)))
    return ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)


def rates(c: ConfusionCounts) -> Rates:
    """Error rates from counts, with the documented degenerate-case values."""
    neg = c.tn + c.fp
    pos = c.tp + c.fn
    fpr = c.fp / neg if neg else math.nan
    fnr = c.fn / pos if pos else math.nan
    error = (c.fp + c.fn) / c.total
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom:
        mcc = (c.tp * c.tn - c.fp * c.fn) / math.sqrt(denom)
    else:
        mcc = 0.0
    return Rates(fpr=fpr, fnr=fnr, error=error, mcc=mcc)


def mean_rates(items: Iterable[Rates]) -> Rates:
    """Mean of per-replication rates; undefined fpr/fnr entries are dropped.

    If a rate is undefined in every replication the mean is NaN.
    """
    rows = list(items)
    if not rows:
        raise ValueError("nothing to aggregate")

    def nanmean(vals: Sequence[float]) -> float:
        kept = [v for v in vals if not math.isnan(v)]
        return sum(kept) / len(kept) if kept else math.nan

    return Rates(
        fpr=nanmean([r.fpr for r in rows]),
        fnr=nanmean([r.fnr for r in rows]),
        error=sum(r.error for r in rows) / len(rows),
        mcc=sum(r.mcc for r in rows) / len(rows),
    )


def format_table(headers: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Plain right-aligned text table; floats rendered to four significant
    figures, NaN as 'n/a'."""

    def cell(v: object) -> str:
        if isinstance(v, float):
            return "n/a" if math.isnan(v) else f"{v:.4g}"
        return str(v)

    grid = [[cell(v) for v in row] for row in rows]
    widths = [
        max(len(h), *(len(r[i]) for r in grid)) if grid else len(h)
        for i, h in enumerate(headers)
    ]
    out = ["  ".join(h.rjust(w) for h, w in zip(headers, widths))]
    out.append("  ".join("-" * w for w in widths))
    for row in grid:
        out.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
    return "\n".join(out)
