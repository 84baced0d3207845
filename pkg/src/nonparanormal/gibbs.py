"""Blocked Gibbs sampler for the shared-transformation Gaussian mixture.

State: per-dimension free spline coefficients (and the latent Gaussian data
they induce), two sets of class moments, imputed labels, and the class-0
weight.  One iteration sweeps three blocks:

1. each dimension's coefficients from their truncated Gaussian full
   conditional, refreshing that latent column immediately;
2. class precisions (Wishart) and means (Gaussian) from the currently
   labeled rows;
3. missing labels (Bernoulli from the density ratio) and then the class
   weight (Beta), unless the weight is held fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import numeric
from .numeric import RngStream
from .prior import ReducedPrior, build_constraints
from .splines import SplineBasis, eval_basis_rows
from .tmvn import constrained_gibbs_sweep

__all__ = [
    "InitializationError",
    "MISSING",
    "ChainConfig",
    "DesignCache",
    "ChainState",
    "PosteriorSummary",
    "build_design",
    "initialize",
    "step_theta",
    "step_params",
    "step_labels",
    "log_joint",
    "log_density_ratio",
    "boundary_count",
    "run_chain",
]

MISSING = -1  # label value marking an unobserved row


class InitializationError(RuntimeError):
    """A feasible starting state could not be constructed."""


@dataclass
class ChainConfig:
    iterations: int = 1000
    burn_in: int | None = None  # None -> iterations // 2
    seed: int = 0
    stream_id: int = 0
    lambda_fixed: float | None = None  # None learns the weight
    lambda_prior: tuple[float, float] = (1.0, 1.0)
    tmvn_sweeps: int = 1
    boundary_m: float = 3.0
    wishart_df: str = "conjugate"  # "conjugate" (n_k - 1) or "classcount" (n_k)
    trace_path: str | None = None

    def validate(self) -> None:
        if self.iterations < 2:
            raise ValueError("need at least 2 iterations")
        burn = self.resolved_burn_in()
        if not 0 <= burn < self.iterations:
            raise ValueError(f"burn_in {burn} outside [0, {self.iterations})")
        if self.lambda_fixed is not None and not 0.0 < self.lambda_fixed < 1.0:
            raise ValueError("fixed class weight must lie strictly in (0, 1)")
        a, b = self.lambda_prior
        if not (a > 0.0 and b > 0.0):
            raise ValueError("lambda prior parameters must be positive")
        if self.tmvn_sweeps < 1:
            raise ValueError("tmvn_sweeps must be >= 1")
        if not self.boundary_m > 1.0:
            raise ValueError("boundary factor m must exceed 1")
        if self.wishart_df not in ("conjugate", "classcount"):
            raise ValueError(f"unknown wishart_df mode {self.wishart_df!r}")

    def resolved_burn_in(self) -> int:
        return self.iterations // 2 if self.burn_in is None else int(self.burn_in)


@dataclass
class DesignCache:
    """Per-dimension affine maps from free coefficients to latent values."""

    design: np.ndarray  # (p, n, J-2)
    offset: np.ndarray  # (n, p)


@dataclass
class ChainState:
    theta_bar: np.ndarray  # (p, J-2)
    y: np.ndarray  # (n, p)
    mu: np.ndarray  # (2, p)
    sigma: np.ndarray  # (2, p, p)
    labels: np.ndarray  # (n,) in {0, 1}
    lambda0: float


@dataclass
class PosteriorSummary:
    theta_bar: np.ndarray  # (p, J-2) posterior means
    mu0: np.ndarray
    mu0_sd: np.ndarray
    sigma0: np.ndarray
    mu1: np.ndarray
    mu1_sd: np.ndarray
    sigma1: np.ndarray
    lambda0: float
    kept_draws: int
    boundary_size: int
    degenerate_skips: int
    notes: tuple[str, ...] = ()


def build_design(basis: SplineBasis, red: ReducedPrior, u: np.ndarray) -> DesignCache:
    """Cache ``y[:, d] = design[d] @ theta_bar[d] + offset[:, d]`` maps."""
    u = np.asarray(u, dtype=float)
    n, p = u.shape
    design = np.empty((p, n, red.size - 2))
    offset = np.empty((n, p))
    for d in range(p):
        rows = eval_basis_rows(basis, u[:, d])
        design[d] = rows @ red.lift
        offset[:, d] = rows @ red.shift
    return DesignCache(design=design, offset=offset)


def _pava_increasing(v: np.ndarray) -> np.ndarray:
    # pool adjacent violators, unit weights
    vals = list(v.astype(float))
    wts = [1.0] * len(vals)
    out_v: list[float] = []
    out_w: list[float] = []
    for val, wt in zip(vals, wts):
        out_v.append(val)
        out_w.append(wt)
        while len(out_v) > 1 and out_v[-2] > out_v[-1]:
            v2, w2 = out_v.pop(), out_w.pop()
            v1, w1 = out_v.pop(), out_w.pop()
            out_v.append((v1 * w1 + v2 * w2) / (w1 + w2))
            out_w.append(w1 + w2)
    res = np.empty(len(vals))
    i = 0
    for val, wt in zip(out_v, out_w):
        cnt = int(round(wt))
        res[i : i + cnt] = val
        i += cnt
    return res


def _initial_coefficients(basis: SplineBasis, red: ReducedPrior) -> np.ndarray:
    """Strictly increasing coefficients consistent with the constraints.

    Least-squares fit of the standard normal quantile function, expressed in
    the identified scale (midpoint value 0, interquartile increment 1), then
    projected onto the constraint plane; isotonic repair handles the rare
    non-monotone projection.
    """
    grid = np.linspace(0.001, 0.999, 201)
    rows = eval_basis_rows(basis, grid)
    quart = numeric.std_normal_quantile(0.75) - numeric.std_normal_quantile(0.25)
    target = numeric.std_normal_quantile(grid) / quart
    theta, *_ = np.linalg.lstsq(rows, target, rcond=None)

    cs = build_constraints(basis)
    a, c = cs.a, cs.c
    pull = a.T @ numeric.solve_spd(a @ a.T, np.eye(2))
    for _ in range(10):
        theta = theta + pull @ (c - a @ theta)
        gaps = np.diff(theta)
        if np.all(gaps > 0.0):
            return theta
        theta = _pava_increasing(theta)
        span = max(theta[-1] - theta[0], 1.0)
        theta = theta + np.arange(theta.size) * (1e-6 * span)  # break flat runs
    raise InitializationError(
        f"could not build an increasing starting spline for basis size {basis.size}"
    )


def _safe_class_moments(
    y: np.ndarray, mask: np.ndarray, p: int
) -> tuple[np.ndarray, np.ndarray]:
    rows = y[mask]
    mu = rows.mean(axis=0)
    if rows.shape[0] >= p + 2:
        cov = np.cov(rows, rowvar=False, ddof=1)
        cov = np.atleast_2d(cov)
        try:
            numeric.check_spd(cov)
            return mu, cov
        except numeric.FactorizationError:
            pass
    # too few labeled rows for a stable class covariance: borrow the pooled one
    cov = np.cov(y, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    try:
        numeric.check_spd(cov)
    except numeric.FactorizationError:
        tr = float(np.trace(cov))
        eps = 1e-6 * tr / p if tr > 0.0 else 1e-6
        cov = cov + eps * np.eye(p)
    return mu, cov


def initialize(
    u: np.ndarray,
    labels_obs: np.ndarray,
    basis: SplineBasis,
    red: ReducedPrior,
    cache: DesignCache,
    config: ChainConfig,
) -> ChainState:
    """Deterministic starting state built from the observed labels."""
    n, p = u.shape
    for k in (0, 1):
        if not np.any(labels_obs == k):
            raise InitializationError(f"no observed labels for class {k}")
    theta0 = _initial_coefficients(basis, red)
    theta_bar = np.tile(theta0[red.kept], (p, 1))
    y = np.empty((n, p))
    for d in range(p):
        y[:, d] = cache.design[d] @ theta_bar[d] + cache.offset[:, d]

    mu = np.empty((2, p))
    sigma = np.empty((2, p, p))
    for k in (0, 1):
        mu[k], sigma[k] = _safe_class_moments(y, labels_obs == k, p)

    labels = labels_obs.copy()
    missing = labels == MISSING
    if missing.any():
        d0 = np.linalg.norm(y[missing] - mu[0], axis=1)
        d1 = np.linalg.norm(y[missing] - mu[1], axis=1)
        labels[missing] = (d1 < d0).astype(labels.dtype)  # ties go to class 0

    if config.lambda_fixed is not None:
        lam = float(config.lambda_fixed)
    else:
        # both classes are observed, so this is strictly inside (0, 1)
        lam = float(np.mean(labels == 0))
    return ChainState(theta_bar=theta_bar, y=y, mu=mu, sigma=sigma, labels=labels, lambda0=lam)


def theta_conditional(
    state: ChainState,
    cache: DesignCache,
    red: ReducedPrior,
    prec: np.ndarray,
    d: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Natural parameters (precision, shift) of dimension d's free-coefficient
    conditional, before the monotonicity restriction is applied."""
    q = red.gamma_bar_inv.copy()
    r = red.gamma_bar_inv_xi.copy()
    for k in (0, 1):
        mask = state.labels == k
        if not mask.any():
            continue
        dm = cache.design[d][mask]
        resid = state.y[mask] - state.mu[k]
        pdd = prec[k, d, d]
        cross = resid @ prec[k, d] - resid[:, d] * pdd
        coef = pdd * (cache.offset[mask, d] - state.mu[k, d]) + cross
        q += pdd * (dm.T @ dm)
        r -= dm.T @ coef
    return q, r


def step_theta(
    state: ChainState,
    cache: DesignCache,
    red: ReducedPrior,
    config: ChainConfig,
    rng,
) -> int:
    """Update every dimension's free coefficients; returns skip count.

    Each dimension d gets a Gaussian full conditional with precision
    ``gamma_bar_inv + sum_k prec_k[d,d] * D_k' D_k`` restricted by the
    monotonicity inequalities; the latent column d is refreshed before the
    next dimension is visited.
    """
    p = state.y.shape[1]
    prec = np.stack([numeric.inv_spd(state.sigma[0]), numeric.inv_spd(state.sigma[1])])
    skips = 0
    for d in range(p):
        q, r = theta_conditional(state, cache, red, prec, d)
        x = state.theta_bar[d]
        for _ in range(config.tmvn_sweeps):
            skips += constrained_gibbs_sweep(q, r, red.f_bar, red.g_bar, x, rng)
        state.y[:, d] = cache.design[d] @ x + cache.offset[:, d]
    return skips


def step_params(state: ChainState, config: ChainConfig, rng) -> list[str]:
    """Redraw class precisions and means from the currently labeled rows."""
    notes: list[str] = []
    p = state.y.shape[1]
    for k in (0, 1):
        rows = state.y[state.labels == k]
        nk = rows.shape[0]
        if nk == 0:
            notes.append(f"class {k} empty, parameters kept")
            continue
        ybar = rows.mean(axis=0)
        resid = rows - ybar
        scatter = resid.T @ resid
        needs_ridge = nk < p + 2
        if not needs_ridge:
            try:
                numeric.check_spd(scatter)
            except numeric.FactorizationError:
                needs_ridge = True
        if needs_ridge:
            tr = float(np.trace(scatter))
            eps = 1e-6 * tr / p if tr > 0.0 else 1e-6
            scatter = scatter + eps * np.eye(p)
        df = nk - 1 if config.wishart_df == "conjugate" else nk
        if df < p:
            notes.append(f"class {k} wishart df raised from {df} to {p}")
            df = p
        omega = numeric.sample_wishart(df, numeric.inv_spd(scatter), rng)
        state.sigma[k] = numeric.inv_spd(omega)
        state.mu[k] = numeric.sample_mvn(ybar, state.sigma[k] / nk, rng)
    return notes


def step_labels(
    state: ChainState, labels_obs: np.ndarray, config: ChainConfig, rng
) -> None:
    """Impute missing labels, then redraw the class-0 weight."""
    missing = labels_obs == MISSING
    if missing.any():
        ym = state.y[missing]
        l0 = math.log(state.lambda0) + numeric.mvn_logpdf(ym, state.mu[0], state.sigma[0])
        l1 = math.log1p(-state.lambda0) + numeric.mvn_logpdf(ym, state.mu[1], state.sigma[1])
        p1 = expit(l1 - l0)
        state.labels[missing] = numeric.sample_bernoulli(p1, rng)
    if config.lambda_fixed is None:
        a, b = config.lambda_prior
        n0 = int(np.sum(state.labels == 0))
        n1 = state.labels.shape[0] - n0
        state.lambda0 = numeric.sample_beta(a + n0, b + n1, rng)


def log_joint(state: ChainState, red: ReducedPrior, config: ChainConfig) -> float:
    """Log of the joint density at the current state, up to a constant."""
    total = 0.0
    for d in range(state.theta_bar.shape[0]):
        total += float(numeric.mvn_logpdf(state.theta_bar[d], red.xi_bar, red.gamma_bar)[0])
    for k in (0, 1):
        rows = state.y[state.labels == k]
        if rows.shape[0]:
            total += float(np.sum(numeric.mvn_logpdf(rows, state.mu[k], state.sigma[k])))
    n0 = int(np.sum(state.labels == 0))
    n1 = state.labels.shape[0] - n0
    total += n0 * math.log(state.lambda0) + n1 * math.log1p(-state.lambda0)
    if config.lambda_fixed is None:
        a, b = config.lambda_prior
        total += (a - 1.0) * math.log(state.lambda0) + (b - 1.0) * math.log1p(-state.lambda0)
    return total


def log_density_ratio(
    y: np.ndarray,
    mu0: np.ndarray,
    sigma0: np.ndarray,
    mu1: np.ndarray,
    sigma1: np.ndarray,
    lambda0: float,
) -> np.ndarray:
    """log(lambda0 * phi0) - log(lambda1 * phi1) per row of y."""
    if not 0.0 < lambda0 < 1.0:
        raise ValueError("class weight must lie strictly in (0, 1)")
    l0 = math.log(lambda0) + numeric.mvn_logpdf(y, mu0, sigma0)
    l1 = math.log1p(-lambda0) + numeric.mvn_logpdf(y, mu1, sigma1)
    return l0 - l1


def boundary_count(
    y: np.ndarray,
    mu0: np.ndarray,
    sigma0: np.ndarray,
    mu1: np.ndarray,
    sigma1: np.ndarray,
    lambda0: float,
    m: float = 3.0,
) -> int:
    """Number of rows whose posterior class odds fall within a factor m of even."""
    if not m > 1.0:
        raise ValueError(f"boundary factor m must exceed 1, got {m}")
    ratio = log_density_ratio(y, mu0, sigma0, mu1, sigma1, lambda0)
    return int(np.sum(np.abs(ratio) < math.log(m)))


def run_chain(
    u: np.ndarray,
    labels_obs: np.ndarray,
    basis: SplineBasis,
    red: ReducedPrior,
    config: ChainConfig,
) -> PosteriorSummary:
    """Run one chain and average the retained draws.

    ``u`` holds the preprocessed data (every entry strictly inside (0, 1));
    ``labels_obs`` uses MISSING (-1) for unlabeled rows and must show both
    classes.  Determinism: identical inputs and (seed, stream_id) reproduce
    the summary bit for bit.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[0] < 2:
        raise ValueError("data must be a 2-d array with at least two rows")
    if np.any(u <= 0.0) or np.any(u >= 1.0) or not np.all(np.isfinite(u)):
        raise ValueError("mapped data must lie strictly inside (0, 1)")
    labels_obs = np.asarray(labels_obs)
    if labels_obs.shape != (u.shape[0],):
        raise ValueError("labels length does not match the data")
    if not np.all(np.isin(labels_obs, (MISSING, 0, 1))):
        raise ValueError("observed labels must be 0, 1, or missing (-1)")
    for k in (0, 1):
        if not np.any(labels_obs == k):
            raise ValueError(f"no observed labels for class {k}")
    config.validate()

    rng = RngStream(config.seed, config.stream_id)
    cache = build_design(basis, red, u)
    state = initialize(u, labels_obs, basis, red, cache, config)
    burn = config.resolved_burn_in()
    kept = 0
    p = u.shape[1]
    acc = {
        "theta": np.zeros_like(state.theta_bar),
        "mu": np.zeros((2, p)),
        "mu2": np.zeros((2, p)),
        "sigma": np.zeros((2, p, p)),
        "lambda0": 0.0,
    }
    skips = 0
    notes: list[str] = []
    trace = open(config.trace_path, "w") if config.trace_path else None
    try:
        if trace:
            trace.write("iteration,log_joint,n0,lambda0,boundary\n")
        for it in range(config.iterations):
            skips += step_theta(state, cache, red, config, rng)
            for msg in step_params(state, config, rng):
                if len(notes) < 50:
                    notes.append(f"iteration {it}: {msg}")
            step_labels(state, labels_obs, config, rng)
            if it >= burn:
                kept += 1
                acc["theta"] += state.theta_bar
                acc["mu"] += state.mu
                acc["mu2"] += state.mu**2
                acc["sigma"] += state.sigma
                acc["lambda0"] += state.lambda0
            if trace:
                lj = log_joint(state, red, config)
                n0 = int(np.sum(state.labels == 0))
                bnd = boundary_count(
                    state.y, state.mu[0], state.sigma[0], state.mu[1], state.sigma[1],
                    state.lambda0, config.boundary_m,
                )
                trace.write(f"{it},{lj!r},{n0},{state.lambda0!r},{bnd}\n")
    finally:
        if trace:
            trace.close()

    theta_mean = acc["theta"] / kept
    mu_mean = acc["mu"] / kept
    sigma_mean = acc["sigma"] / kept
    lam_mean = acc["lambda0"] / kept
    if kept > 1:
        var = (acc["mu2"] - kept * mu_mean**2) / (kept - 1)
    else:
        var = np.zeros_like(mu_mean)
    mu_sd = np.sqrt(np.maximum(var, 0.0))

    y_mean = np.empty_like(state.y)
    for d in range(p):
        y_mean[:, d] = cache.design[d] @ theta_mean[d] + cache.offset[:, d]
    boundary = boundary_count(
        y_mean, mu_mean[0], sigma_mean[0], mu_mean[1], sigma_mean[1],
        lam_mean, config.boundary_m,
    )
    return PosteriorSummary(
        theta_bar=theta_mean,
        mu0=mu_mean[0],
        mu0_sd=mu_sd[0],
        sigma0=sigma_mean[0],
        mu1=mu_mean[1],
        mu1_sd=mu_sd[1],
        sigma1=sigma_mean[1],
        lambda0=float(lam_mean),
        kept_draws=kept,
        boundary_size=boundary,
        degenerate_skips=skips,
        notes=tuple(notes),
    )
