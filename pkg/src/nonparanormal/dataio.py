"""CSV formats for datasets and predictions.

Data files: one header row of feature names plus a final ``label`` column;
labels are ``0``, ``1``, or ``?`` for missing.  Prediction files: columns
``row,label,p_class1`` with 0-based row indices.  Floats are written with
full round-trip precision.
"""

from __future__ import annotations

import csv

import numpy as np

from .classifier import Dataset, make_dataset
from .gibbs import MISSING

__all__ = [
    "DataFormatError",
    "read_data_csv",
    "write_data_csv",
    "read_predictions_csv",
    "write_predictions_csv",
]

_LABEL_TOKENS = {"0": 0, "1": 1, "?": MISSING}
_LABEL_TEXT = {0: "0", 1: "1", MISSING: "?"}


class DataFormatError(ValueError):
    """A CSV file violated the expected schema."""


def _fail(path: str, row: int | None, msg: str) -> None:
    where = f"{path}" if row is None else f"{path} row {row}"
    raise DataFormatError(f"{where}: {msg}")


def read_data_csv(path: str) -> Dataset:
    """Parse a data CSV; schema violations name the offending row/column."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r]  # drop fully blank lines
    if not rows:
        _fail(path, None, "file is empty")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[-1] != "label":
        _fail(path, 1, "header must list feature names and end with 'label'")
    p = len(header) - 1
    if not rows[1:]:
        _fail(path, None, "no data rows")
    x = np.empty((len(rows) - 1, p))
    labels = np.empty(len(rows) - 1, dtype=np.int64)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != p + 1:
            _fail(path, i, f"expected {p + 1} fields, found {len(row)}")
        for d in range(p):
            try:
                x[i - 2, d] = float(row[d])
            except ValueError:
                _fail(path, i, f"column {header[d]!r}: {row[d]!r} is not a number")
        tok = row[p].strip()
        if tok not in _LABEL_TOKENS:
            _fail(path, i, f"label {tok!r} is not 0, 1, or ?")
        labels[i - 2] = _LABEL_TOKENS[tok]
    try:
        return make_dataset(x, labels, feature_names=header[:-1])
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def write_data_csv(path: str, data: Dataset) -> None:
    names = data.feature_names or tuple(f"x{d + 1}" for d in range(data.p))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + ["label"])
        for i in range(data.n):
            writer.writerow(
                [repr(float(v)) for v in data.x[i]] + [_LABEL_TEXT[int(data.labels[i])]]
            )


def write_predictions_csv(path: str, labels: np.ndarray, p_class1: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "label", "p_class1"])
        for i, (lab, pr) in enumerate(zip(labels, p_class1)):
            writer.writerow([i, int(lab), repr(float(pr))])


def read_predictions_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Returns (labels, p_class1) ordered by the row index column."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != ["row", "label", "p_class1"]:
        _fail(path, 1, "header must be row,label,p_class1")
    if not rows[1:]:
        _fail(path, None, "no prediction rows")
    idx = np.empty(len(rows) - 1, dtype=np.int64)
    labels = np.empty(len(rows) - 1, dtype=np.int64)
    probs = np.empty(len(rows) - 1)
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            _fail(path, i, f"expected 3 fields, found {len(row)}")
        try:
            idx[i - 2] = int(row[0])
            labels[i - 2] = int(row[1])
            probs[i - 2] = float(row[2])
        except ValueError:
            _fail(path, i, "fields must be int,int,float")
        if labels[i - 2] not in (0, 1):
            _fail(path, i, f"label must be 0 or 1, got {row[1]!r}")
        if not 0.0 <= probs[i - 2] <= 1.0:
            _fail(path, i, "p_class1 must lie in [0, 1]")
    if sorted(idx.tolist()) != list(range(len(idx))):
        _fail(path, None, "row indices must be a permutation of 0..n-1")
    order = np.argsort(idx)
    return labels[order], probs[order]
