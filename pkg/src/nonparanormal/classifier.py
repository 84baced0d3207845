"""User-facing semi-supervised classifier: preprocess, select, fit, predict.

The pipeline maps each raw feature through the standard normal CDF of its
standardized value, fits monotone spline transformations and Gaussian class
models by Gibbs sampling for a range of basis sizes, keeps the size whose
decision boundary crosses the fewest training points, and classifies new
rows by the posterior-mean density ratio.
"""

from __future__ import annotations

import functools
import json
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import gibbs, numeric, prior, splines

__all__ = [
    "FitError",
    "ModelFormatError",
    "Dataset",
    "PreprocessMap",
    "SelectionRow",
    "FittedModel",
    "make_dataset",
    "fit_preprocess",
    "apply_preprocess",
    "select_and_fit",
    "predict",
    "boundary_count",
    "save_model",
    "load_model",
]

CLAMP = 1e-6  # mapped values are kept inside [CLAMP, 1 - CLAMP]

MODEL_FORMAT = "npn-model"
MODEL_VERSION = 1


class FitError(RuntimeError):
    """No basis size could be fitted."""


class ModelFormatError(ValueError):
    """A model file failed structural validation."""


@dataclass(frozen=True)
class Dataset:
    """Rows of raw features plus labels (0, 1, or MISSING = -1)."""

    x: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def make_dataset(x, labels, feature_names=None) -> Dataset:
    """Validated Dataset: finite features, labels in {-1, 0, 1}."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError(f"features must form a nonempty 2-d array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise ValueError(f"non-finite feature at row {bad[0]}, column {bad[1]}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (x.shape[0],):
        raise ValueError("labels length does not match the number of rows")
    if not np.all(np.isin(labels, (gibbs.MISSING, 0, 1))):
        raise ValueError("labels must be 0, 1, or -1 for missing")
    if feature_names is not None:
        feature_names = tuple(str(s) for s in feature_names)
        if len(feature_names) != x.shape[1]:
            raise ValueError("feature_names length does not match the number of columns")
    return Dataset(x=x, labels=labels, feature_names=feature_names)


@dataclass(frozen=True)
class PreprocessMap:
    mean: np.ndarray  # (p,)
    scale: np.ndarray  # (p,) sample standard deviations


def fit_preprocess(x: np.ndarray, feature_names=None) -> PreprocessMap:
    """Column means and standard deviations; constant columns are an error."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("need at least two rows to standardize")
    mean = x.mean(axis=0)
    scale = x.std(axis=0, ddof=1)
    for d in np.nonzero(~(scale > 0.0))[0]:
        name = feature_names[d] if feature_names else f"column {d}"
        raise ValueError(f"feature {name} is constant and cannot be standardized")
    return PreprocessMap(mean=mean, scale=scale)


def apply_preprocess(pm: PreprocessMap, x: np.ndarray) -> np.ndarray:
    """Map rows into (0, 1) per dimension, clamped away from the endpoints."""
    x = np.asarray(x, dtype=float)
    u = numeric.std_normal_cdf((x - pm.mean) / pm.scale)
    return np.clip(u, CLAMP, 1.0 - CLAMP)


@dataclass(frozen=True)
class SelectionRow:
    size: int
    boundary: int | None  # None when the pilot chain failed
    note: str


@dataclass
class FittedModel:
    basis_size: int
    pre_mean: np.ndarray
    pre_scale: np.ndarray
    theta_bar: np.ndarray  # (p, J-2)
    mu0: np.ndarray
    sigma0: np.ndarray
    mu1: np.ndarray
    sigma1: np.ndarray
    lambda0: float
    selection: tuple[SelectionRow, ...]
    config: dict
    feature_names: tuple[str, ...] | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.pre_mean.shape[0]


@functools.lru_cache(maxsize=32)
def _machinery(size: int, nu: float, tau: float, sigma2: float):
    basis = splines.cubic_basis(size)
    red = prior.build_reduced_prior(basis, nu=nu, tau=tau, sigma2=sigma2)
    return basis, red


def _transform(model: FittedModel, u: np.ndarray) -> np.ndarray:
    cfg = model.config
    basis, red = _machinery(
        model.basis_size, cfg.get("nu", 0.0), cfg.get("tau", 1.0), cfg.get("sigma2", 1.0)
    )
    cache = gibbs.build_design(basis, red, u)
    y = np.empty_like(u)
    for d in range(u.shape[1]):
        y[:, d] = cache.design[d] @ model.theta_bar[d] + cache.offset[:, d]
    return y


def select_and_fit(
    data: Dataset,
    basis_sizes=range(8, 16),
    pilot_iters: int = 500,
    final_iters: int = 10000,
    m: float = 3.0,
    *,
    seed: int = 0,
    lambda_fixed: float | None = None,
    lambda_prior: tuple[float, float] = (1.0, 1.0),
    nu: float = 0.0,
    tau: float = 1.0,
    sigma2: float = 1.0,
    burn_in: int | None = None,
    wishart_df: str = "conjugate",
    tmvn_sweeps: int = 1,
    log=None,
) -> FittedModel:
    """Pick the basis size with the fewest boundary-zone training points,
    then fit it with a longer chain.

    Pilot chains use stream ids equal to their basis size; the final chain
    uses stream id 0.  Ties in the boundary count go to the smaller basis.
    A pilot failure removes that size from contention; all sizes failing
    raises FitError.
    """
    sizes = sorted(set(int(j) for j in basis_sizes))
    if not sizes:
        raise ValueError("no basis sizes supplied")
    for k in (0, 1):
        if not np.any(data.labels == k):
            raise ValueError(f"training data shows no observed labels for class {k}")
    pm = fit_preprocess(data.x, data.feature_names)
    u = apply_preprocess(pm, data.x)

    rows: list[SelectionRow] = []
    best: tuple[int, int] | None = None  # (boundary, size)
    for size in sizes:
        try:
            basis, red = _machinery(size, nu, tau, sigma2)
            cfg = gibbs.ChainConfig(
                iterations=pilot_iters,
                burn_in=None if burn_in is None else min(burn_in, pilot_iters // 2),
                seed=seed,
                stream_id=size,
                lambda_fixed=lambda_fixed,
                lambda_prior=lambda_prior,
                tmvn_sweeps=tmvn_sweeps,
                boundary_m=m,
                wishart_df=wishart_df,
            )
            summary = gibbs.run_chain(u, data.labels, basis, red, cfg)
        except Exception as exc:  # noqa: BLE001 - a failed size just drops out
            rows.append(SelectionRow(size=size, boundary=None, note=f"failed: {exc}"))
            if log:
                log(f"basis {size}: failed ({exc})")
            continue
        rows.append(SelectionRow(size=size, boundary=summary.boundary_size, note="ok"))
        if log:
            log(f"basis {size}: boundary count {summary.boundary_size}")
        if best is None or (summary.boundary_size, size) < best:
            best = (summary.boundary_size, size)
    if best is None:
        raise FitError("every candidate basis size failed to fit")

    chosen = best[1]
    basis, red = _machinery(chosen, nu, tau, sigma2)
    cfg = gibbs.ChainConfig(
        iterations=final_iters,
        burn_in=burn_in,
        seed=seed,
        stream_id=0,
        lambda_fixed=lambda_fixed,
        lambda_prior=lambda_prior,
        tmvn_sweeps=tmvn_sweeps,
        boundary_m=m,
        wishart_df=wishart_df,
    )
    summary = gibbs.run_chain(u, data.labels, basis, red, cfg)
    if log:
        log(f"chosen basis {chosen}; final boundary count {summary.boundary_size}")
    return FittedModel(
        basis_size=chosen,
        pre_mean=pm.mean,
        pre_scale=pm.scale,
        theta_bar=summary.theta_bar,
        mu0=summary.mu0,
        sigma0=summary.sigma0,
        mu1=summary.mu1,
        sigma1=summary.sigma1,
        lambda0=summary.lambda0,
        selection=tuple(rows),
        config={
            "seed": seed,
            "pilot_iters": pilot_iters,
            "final_iters": final_iters,
            "m": m,
            "nu": nu,
            "tau": tau,
            "sigma2": sigma2,
            "lambda_fixed": lambda_fixed,
            "lambda_prior": list(lambda_prior),
            "burn_in": burn_in,
            "wishart_df": wishart_df,
            "tmvn_sweeps": tmvn_sweeps,
        },
        feature_names=data.feature_names,
        diagnostics={
            "kept_draws": summary.kept_draws,
            "boundary_size": summary.boundary_size,
            "degenerate_skips": summary.degenerate_skips,
            "mu0_sd": summary.mu0_sd.tolist(),
            "mu1_sd": summary.mu1_sd.tolist(),
            "notes": list(summary.notes),
        },
    )


def predict(model: FittedModel, x_new: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Class labels and class-1 probabilities for new rows.

    A row is labeled 0 exactly when its class-0 log weight strictly exceeds
    the class-1 one; ties go to class 1.
    """
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim != 2 or x_new.shape[1] != model.p:
        raise ValueError(
            f"expected rows of dimension {model.p}, got array of shape {x_new.shape}"
        )
    if not np.all(np.isfinite(x_new)):
        raise ValueError("features must be finite")
    pm = PreprocessMap(mean=model.pre_mean, scale=model.pre_scale)
    u = apply_preprocess(pm, x_new)
    y = _transform(model, u)
    ratio = gibbs.log_density_ratio(
        y, model.mu0, model.sigma0, model.mu1, model.sigma1, model.lambda0
    )
    labels = np.where(ratio > 0.0, 0, 1).astype(np.int64)
    return labels, expit(-ratio)


def boundary_count(source, y: np.ndarray, m: float = 3.0) -> int:
    """Boundary-zone count for already-transformed rows under a fitted model
    or chain summary (anything exposing mu0/sigma0/mu1/sigma1/lambda0)."""
    return gibbs.boundary_count(
        y, source.mu0, source.sigma0, source.mu1, source.sigma1, source.lambda0, m
    )


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def save_model(model: FittedModel, path: str) -> None:
    """Serialize to canonical JSON (stable key order, repr floats), so that
    save -> load -> save is byte-identical."""
    for name, arr in (
        ("theta_bar", model.theta_bar), ("mu0", model.mu0), ("sigma0", model.sigma0),
        ("mu1", model.mu1), ("sigma1", model.sigma1),
        ("pre_mean", model.pre_mean), ("pre_scale", model.pre_scale),
    ):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"model field {name} contains non-finite values")
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "basis_size": int(model.basis_size),
        "preprocess": {"mean": model.pre_mean.tolist(), "scale": model.pre_scale.tolist()},
        "theta_bar": model.theta_bar.tolist(),
        "class0": {"mean": model.mu0.tolist(), "cov": model.sigma0.tolist()},
        "class1": {"mean": model.mu1.tolist(), "cov": model.sigma1.tolist()},
        "lambda0": float(model.lambda0),
        "feature_names": list(model.feature_names) if model.feature_names else None,
        "selection": [
            {"size": r.size, "boundary": r.boundary, "note": r.note} for r in model.selection
        ],
        "config": model.config,
        "diagnostics": model.diagnostics,
    }
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(_canonical(doc))
    os.replace(tmp, path)


def _expect(doc: dict, key: str, kinds) -> object:
    if key not in doc:
        raise ModelFormatError(f"model file missing key {key!r}")
    val = doc[key]
    if not isinstance(val, kinds):
        raise ModelFormatError(f"model key {key!r} has the wrong type")
    return val


def _as_matrix(val, rows: int, cols: int, what: str) -> np.ndarray:
    arr = np.asarray(val, dtype=float)
    if arr.shape != (rows, cols) or not np.all(np.isfinite(arr)):
        raise ModelFormatError(f"{what} must be a finite {rows}x{cols} matrix")
    return arr


def load_model(path: str) -> FittedModel:
    """Parse and validate a model file; structural problems raise
    ModelFormatError naming the offending part."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError("model file must hold a JSON object")
    if doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a model file (format tag mismatch)")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")

    size = _expect(doc, "basis_size", int)
    if size < 5:
        raise ModelFormatError("basis_size must be at least 5")
    pre = _expect(doc, "preprocess", dict)
    mean = np.asarray(_expect(pre, "mean", list), dtype=float)
    scale = np.asarray(_expect(pre, "scale", list), dtype=float)
    p = mean.shape[0]
    if p < 1 or scale.shape != (p,) or not np.all(scale > 0.0):
        raise ModelFormatError("preprocess block is inconsistent")
    theta = _as_matrix(_expect(doc, "theta_bar", list), p, size - 2, "theta_bar")
    cls = []
    for key in ("class0", "class1"):
        blk = _expect(doc, key, dict)
        cmean = np.asarray(_expect(blk, "mean", list), dtype=float)
        if cmean.shape != (p,) or not np.all(np.isfinite(cmean)):
            raise ModelFormatError(f"{key} mean must be a finite vector of length {p}")
        ccov = _as_matrix(_expect(blk, "cov", list), p, p, f"{key} cov")
        try:
            numeric.check_spd(ccov)
        except (ValueError, numeric.FactorizationError) as exc:
            raise ModelFormatError(f"{key} cov is not positive definite: {exc}") from exc
        cls.append((cmean, ccov))
    lam = _expect(doc, "lambda0", (int, float))
    if not 0.0 < float(lam) < 1.0:
        raise ModelFormatError("lambda0 must lie strictly in (0, 1)")
    names = doc.get("feature_names")
    if names is not None:
        if not isinstance(names, list) or len(names) != p:
            raise ModelFormatError("feature_names must be null or one name per column")
        names = tuple(str(s) for s in names)
    sel = []
    for row in doc.get("selection", []):
        if not isinstance(row, dict) or "size" not in row:
            raise ModelFormatError("selection rows must be objects with a size")
        sel.append(
            SelectionRow(
                size=int(row["size"]),
                boundary=row.get("boundary"),
                note=str(row.get("note", "")),
            )
        )
    return FittedModel(
        basis_size=size,
        pre_mean=mean,
        pre_scale=scale,
        theta_bar=theta,
        mu0=cls[0][0],
        sigma0=cls[0][1],
        mu1=cls[1][0],
        sigma1=cls[1][1],
        lambda0=float(lam),
        selection=tuple(sel),
        config=dict(doc.get("config", {})),
        feature_names=names,
        diagnostics=dict(doc.get("diagnostics", {})),
    )
