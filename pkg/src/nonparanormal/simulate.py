"""Synthetic data generation: Gaussian class pairs pushed through known
monotone transformations, with per-class label masking.

A scenario fixes the dimension, per-class training size, per-class labeled
count, transformation family, test size, and seed.  Scenarios round-trip
through a small key = value manifest format.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np
from scipy.special import expit, logit

from . import numeric
from .classifier import Dataset, make_dataset
from .gibbs import MISSING
from .numeric import RngStream

__all__ = [
    "TRANSFORMS",
    "MASK_MODES",
    "ManifestError",
    "SimScenario",
    "ClassParams",
    "SimulatedData",
    "gen_class_params",
    "transform_params",
    "apply_transform",
    "inverse_transform",
    "gen_dataset",
    "parse_manifest",
    "write_manifest",
    "scenario_grid",
]

TRANSFORMS = ("logistic", "probit", "mixed")
MASK_MODES = ("per_class", "pooled")

_MIN_EIG = 1e-10
_MAX_PARAM_TRIES = 1000


class ManifestError(ValueError):
    """A scenario manifest failed to parse; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class SimScenario:
    p: int
    n_star: int  # training rows per class
    n_l_star: int  # labeled training rows per class
    transform: str
    seed: int
    n_test_per_class: int = 5000
    replications: int = 1
    mask_mode: str = "per_class"

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be at least 1")
        if self.n_star < 2:
            raise ValueError("n_star must be at least 2")
        if not 1 <= self.n_l_star <= self.n_star:
            raise ValueError("n_l_star must lie in [1, n_star]")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"transform must be one of {TRANSFORMS}")
        if self.n_test_per_class < 1:
            raise ValueError("n_test_per_class must be positive")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if self.mask_mode not in MASK_MODES:
            raise ValueError(f"mask_mode must be one of {MASK_MODES}")


@dataclass(frozen=True)
class ClassParams:
    mu0: np.ndarray
    sigma0: np.ndarray
    mu1: np.ndarray
    sigma1: np.ndarray


@dataclass(frozen=True)
class SimulatedData:
    train: Dataset
    test: Dataset
    params: ClassParams


def _random_spd(p: int, gen: np.random.Generator) -> np.ndarray:
    for _ in range(_MAX_PARAM_TRIES):
        a = gen.uniform(-1.0, 1.0, size=(p, p))
        s = a.T @ a
        if float(np.linalg.eigvalsh(s)[0]) >= _MIN_EIG:
            return s
    raise RuntimeError("could not draw a well-conditioned covariance")


def gen_class_params(p: int, rng) -> ClassParams:
    """Means uniform on [0, 4], covariances A'A with A uniform on [-1, 1];
    covariances are redrawn until the smallest eigenvalue clears 1e-10."""
    gen = numeric._as_rng(rng)
    mu0 = gen.uniform(0.0, 4.0, size=p)
    mu1 = gen.uniform(0.0, 4.0, size=p)
    sigma0 = _random_spd(p, gen)
    sigma1 = _random_spd(p, gen)
    return ClassParams(mu0=mu0, sigma0=sigma0, mu1=mu1, sigma1=sigma1)


def transform_params(params: ClassParams) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension center (average of class means) and scale (average of
    class standard deviations) used by every transformation family."""
    center = 0.5 * (params.mu0 + params.mu1)
    scale = 0.5 * (np.sqrt(np.diag(params.sigma0)) + np.sqrt(np.diag(params.sigma1)))
    return center, scale


def apply_transform(z: np.ndarray, kind: str, center: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """Monotone map from latent Gaussian values into (0, 1), elementwise."""
    if kind == "logistic":
        return expit((z - center) / scale)
    if kind == "probit":
        return numeric.std_normal_cdf((z - center) / scale)
    raise ValueError(f"unknown transform kind {kind!r}")


def inverse_transform(x: np.ndarray, kind: str, center: np.ndarray, scale: np.ndarray) -> np.ndarray:
    if kind == "logistic":
        return center + scale * logit(x)
    if kind == "probit":
        return center + scale * numeric.std_normal_quantile(x)
    raise ValueError(f"unknown transform kind {kind!r}")


def _observed_rows(z0: np.ndarray, z1: np.ndarray, transform: str, center, scale) -> np.ndarray:
    if transform == "mixed":
        x0 = apply_transform(z0, "logistic", center, scale)
        x1 = apply_transform(z1, "probit", center, scale)
    else:
        x0 = apply_transform(z0, transform, center, scale)
        x1 = apply_transform(z1, transform, center, scale)
    return np.vstack([x0, x1])


def gen_dataset(scenario: SimScenario, rep: int = 0) -> SimulatedData:
    """One replication: fresh class parameters, a partially labeled training
    set (class-0 rows first), and a fully labeled test set."""
    rng = RngStream(scenario.seed, rep)
    gen = rng.generator
    params = gen_class_params(scenario.p, gen)
    center, scale = transform_params(params)

    ns, nl = scenario.n_star, scenario.n_l_star
    z0 = gen.multivariate_normal(params.mu0, params.sigma0, size=ns, method="cholesky")
    z1 = gen.multivariate_normal(params.mu1, params.sigma1, size=ns, method="cholesky")
    x_train = _observed_rows(z0, z1, scenario.transform, center, scale)
    truth = np.repeat(np.array([0, 1], dtype=np.int64), ns)
    labels = np.full(2 * ns, MISSING, dtype=np.int64)
    if scenario.mask_mode == "per_class":
        keep0 = gen.permutation(ns)[:nl]
        keep1 = ns + gen.permutation(ns)[:nl]
        keep = np.concatenate([keep0, keep1])
    else:
        keep = gen.permutation(2 * ns)[: 2 * nl]
    labels[keep] = truth[keep]

    nt = scenario.n_test_per_class
    t0 = gen.multivariate_normal(params.mu0, params.sigma0, size=nt, method="cholesky")
    t1 = gen.multivariate_normal(params.mu1, params.sigma1, size=nt, method="cholesky")
    x_test = _observed_rows(t0, t1, scenario.transform, center, scale)
    test_labels = np.repeat(np.array([0, 1], dtype=np.int64), nt)

    return SimulatedData(
        train=make_dataset(x_train, labels),
        test=make_dataset(x_test, test_labels),
        params=params,
    )


_REQUIRED_KEYS = ("p", "n_star", "n_l_star", "transform", "seed")
_INT_KEYS = ("p", "n_star", "n_l_star", "seed", "n_test_per_class", "replications")
_STR_KEYS = ("transform", "mask_mode")
_ALL_KEYS = _INT_KEYS + _STR_KEYS


def parse_manifest(path: str) -> SimScenario:
    """Read a key = value scenario manifest.

    Lines are ``key = value``; blank lines and ``#`` comments are ignored.
    Problems raise ManifestError carrying the 1-based line number.
    """
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc}") from exc
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ManifestError(f"expected key = value, got {line!r}", lineno)
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _ALL_KEYS:
            raise ManifestError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ManifestError(f"duplicate key {key!r}", lineno)
        if key in _INT_KEYS:
            try:
                values[key] = int(val)
            except ValueError:
                raise ManifestError(f"key {key!r} needs an integer, got {val!r}", lineno) from None
        else:
            values[key] = val
    for key in _REQUIRED_KEYS:
        if key not in values:
            raise ManifestError(f"missing required key {key!r}")
    try:
        return SimScenario(**values)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ManifestError(str(exc)) from exc


def write_manifest(scenario: SimScenario, path: str) -> None:
    lines = [f"{f.name} = {getattr(scenario, f.name)}" for f in fields(SimScenario)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def scenario_grid(transform: str, p_values: Sequence[int]) -> list[tuple[int, int, int]]:
    """The benchmark grid: (p, n_star, n_l_star) cells in report order."""
    if transform not in TRANSFORMS:
        raise ValueError(f"transform must be one of {TRANSFORMS}")
    return [
        (p, n_star, n_l)
        for p in p_values
        for n_star in (50, 100)
        for n_l in (3, 5, 10)
        if n_l <= n_star
    ]
