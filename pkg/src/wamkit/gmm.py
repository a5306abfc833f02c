"""Full-covariance Gaussian mixtures fitted by expectation maximization.

The fitting loop keeps a log-likelihood value for every parameter iterate it
produces, including the returned one, so callers can audit monotonicity. All
randomness flows through ``numpy.random.default_rng`` seeded from the config,
which makes fits bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    DegenerateComponent,
    DimMismatch,
    InsufficientCurve,
    InsufficientSamples,
    InvalidInput,
)
from .gaussian import Gaussian, _as_feature_matrix
from .linalg import symmetrize

__all__ = [
    "TransformInfo",
    "EmConfig",
    "FitMeta",
    "Gmm",
    "KneeResult",
    "log_transform",
    "fit_gmm",
    "log_likelihood",
    "aic",
    "select_k",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TransformInfo:
    """Records whether features were log-transformed before fitting."""

    log: bool = False
    epsilon: float = 1e-6


@dataclass(frozen=True)
class EmConfig:
    """Knobs for the EM fit.

    ``rel_tol`` stops the loop once the mean per-sample log-likelihood moves
    by less than ``rel_tol * max(1, |previous|)`` between iterates, a relative
    test with an absolute floor so it stays meaningful near zero. ``reg_covar``
    is added to every covariance diagonal after each update. ``n_init``
    restarts run with sub-seeds derived from ``seed`` and the best final
    log-likelihood wins.
    """

    max_iter: int = 100
    rel_tol: float = 1e-3
    reg_covar: float = 1e-6
    n_init: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise InvalidInput(f"max_iter must be >= 1, got {self.max_iter}")
        if not (self.rel_tol > 0.0 and math.isfinite(self.rel_tol)):
            raise InvalidInput(f"rel_tol must be positive, got {self.rel_tol}")
        if not (self.reg_covar >= 0.0 and math.isfinite(self.reg_covar)):
            raise InvalidInput(f"reg_covar must be >= 0, got {self.reg_covar}")
        if self.n_init < 1:
            raise InvalidInput(f"n_init must be >= 1, got {self.n_init}")


@dataclass(frozen=True)
class FitMeta:
    seed: int
    iterations: int
    loglik: float
    transform: TransformInfo = TransformInfo()
    ll_trace: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class Gmm:
    """Mixture weights plus one Gaussian per component, common dimension."""

    weights: np.ndarray
    components: tuple[Gaussian, ...]
    meta: FitMeta

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        components = tuple(self.components)
        if len(components) == 0:
            raise InvalidInput("mixture needs at least one component")
        if weights.shape != (len(components),):
            raise DimMismatch(
                f"{weights.size} weights for {len(components)} components"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0.0):
            raise InvalidInput("weights must be finite and nonnegative")
        if abs(float(weights.sum()) - 1.0) > 1e-9:
            raise InvalidInput(f"weights sum to {weights.sum()!r}, expected 1")
        dim = components[0].dim
        for i, comp in enumerate(components):
            if comp.dim != dim:
                raise DimMismatch(f"component {i} has dim {comp.dim}, expected {dim}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def with_transform(self, info: TransformInfo) -> "Gmm":
        """Copy of this mixture with the transform record updated."""
        return Gmm(self.weights, self.components, replace(self.meta, transform=info))


def log_transform(x, epsilon: float = 1e-6) -> np.ndarray:
    """Elementwise ``log(x + epsilon)`` for nonnegative feature matrices."""
    x = _as_feature_matrix(x)
    if not (epsilon > 0.0 and math.isfinite(epsilon)):
        raise InvalidInput(f"epsilon must be a positive real, got {epsilon}")
    if float(x.min()) < 0.0:
        raise InvalidInput("features must be nonnegative for the log transform")
    return np.log(x + epsilon)


def _component_factors(covs: np.ndarray, reg_covar: float):
    """Cholesky-based factors for density evaluation, one per component.

    Returns (inverse factors stacked (k, d, d), half log-determinants (k,)).
    """
    k, d, _ = covs.shape
    inv_factors = np.empty_like(covs)
    half_logdets = np.empty(k)
    for j in range(k):
        try:
            chol = np.linalg.cholesky(covs[j])
        except np.linalg.LinAlgError:
            raise DegenerateComponent(
                j, f"covariance not positive definite (reg_covar={reg_covar:g})"
            ) from None
        inv_factors[j] = np.linalg.inv(chol)
        half_logdets[j] = float(np.log(np.diag(chol)).sum())
    return inv_factors, half_logdets


def _weighted_log_densities(x, weights, means, inv_factors, half_logdets):
    """Matrix of ``log(w_j) + log N(x_i; mu_j, C_j)``, shape (n, k)."""
    n, d = x.shape
    k = means.shape[0]
    out = np.empty((n, k))
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    for j in range(k):
        z = (x - means[j]) @ inv_factors[j].T
        maha = np.einsum("ij,ij->i", z, z)
        out[:, j] = log_w[j] - half_logdets[j] - 0.5 * (d * _LOG_2PI + maha)
    return out


def _loglik_and_resp(weighted_log_dens):
    """Total log-likelihood and posterior responsibilities via log-sum-exp."""
    row_max = weighted_log_dens.max(axis=1)
    shifted = np.exp(weighted_log_dens - row_max[:, None])
    row_sum = shifted.sum(axis=1)
    loglik = float((row_max + np.log(row_sum)).sum())
    resp = shifted / row_sum[:, None]
    return loglik, resp


def _m_step(x, resp, reg_covar):
    """Weighted moment updates; raises when a component loses all mass."""
    n, d = x.shape
    mass = resp.sum(axis=0)
    for j, m in enumerate(mass):
        if not m > 0.0:
            raise DegenerateComponent(j, "component lost all responsibility mass")
    weights = mass / n
    means = (resp.T @ x) / mass[:, None]
    k = resp.shape[1]
    covs = np.empty((k, d, d))
    for j in range(k):
        diff = x - means[j]
        cov = symmetrize(diff.T @ (resp[:, j][:, None] * diff) / mass[j])
        cov[np.diag_indices(d)] += reg_covar
        covs[j] = cov
    return weights, means, covs


def _kmeanspp_seeds(x, k, rng) -> np.ndarray:
    """Classic k-means++ seeding: spread initial centers by squared distance."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    dist2 = ((x - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(dist2.sum())
        if total > 0.0:
            idx = int(rng.choice(n, p=dist2 / total))
        else:
            idx = int(rng.integers(n))
        centers[j] = x[idx]
        dist2 = np.minimum(dist2, ((x - centers[j]) ** 2).sum(axis=1))
    return centers


def _single_fit(x, k, config: EmConfig, init_index: int):
    n = x.shape[0]
    rng = np.random.default_rng((config.seed, init_index))

    centers = _kmeanspp_seeds(x, k, rng)
    nearest = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2).argmin(axis=1)
    resp = np.zeros((n, k))
    resp[np.arange(n), nearest] = 1.0
    weights, means, covs = _m_step(x, resp, config.reg_covar)

    inv_factors, half_logdets = _component_factors(covs, config.reg_covar)
    dens = _weighted_log_densities(x, weights, means, inv_factors, half_logdets)
    loglik, resp = _loglik_and_resp(dens)
    trace = [loglik]

    iterations = 0
    for _ in range(config.max_iter):
        weights, means, covs = _m_step(x, resp, config.reg_covar)
        iterations += 1
        inv_factors, half_logdets = _component_factors(covs, config.reg_covar)
        dens = _weighted_log_densities(x, weights, means, inv_factors, half_logdets)
        new_loglik, resp = _loglik_and_resp(dens)
        trace.append(new_loglik)
        prev_mean, new_mean = trace[-2] / n, new_loglik / n
        if abs(new_mean - prev_mean) <= config.rel_tol * max(1.0, abs(prev_mean)):
            break

    return weights, means, covs, iterations, trace


def fit_gmm(x, k: int, config: EmConfig | None = None) -> Gmm:
    """Fit a k-component full-covariance mixture to feature rows.

    Initialization draws k-means++ seeds, assigns one-hot responsibilities to
    the nearest seed, and applies one moment update. EM then alternates
    posterior and moment steps until the mean per-sample log-likelihood
    stabilizes or ``max_iter`` is hit. Components are returned sorted by first
    mean coordinate (ties broken by descending weight) so equal fits compare
    equal regardless of internal labeling.
    """
    config = config or EmConfig()
    x = _as_feature_matrix(x)
    if k < 1:
        raise InvalidInput(f"k must be >= 1, got {k}")
    if x.shape[0] < k:
        raise InsufficientSamples(
            f"k exceeds sample count (k={k}, rows={x.shape[0]})"
        )

    best = None
    for init_index in range(config.n_init):
        result = _single_fit(x, k, config, init_index)
        if best is None or result[4][-1] > best[4][-1]:
            best = result
    weights, means, covs, iterations, trace = best

    order = np.lexsort((-weights, means[:, 0]))
    components = tuple(
        Gaussian(means[j].copy(), symmetrize(covs[j])) for j in order
    )
    meta = FitMeta(
        seed=config.seed,
        iterations=iterations,
        loglik=trace[-1],
        ll_trace=tuple(trace),
    )
    return Gmm(weights[order], components, meta)


def _gmm_log_densities(gmm: Gmm, x: np.ndarray) -> np.ndarray:
    covs = np.stack([c.cov for c in gmm.components])
    means = np.stack([c.mean for c in gmm.components])
    inv_factors, half_logdets = _component_factors(covs, 0.0)
    return _weighted_log_densities(x, gmm.weights, means, inv_factors, half_logdets)


def log_likelihood(gmm: Gmm, x) -> float:
    """Total log-likelihood of the rows of ``x`` under the mixture."""
    x = _as_feature_matrix(x)
    if x.shape[1] != gmm.dim:
        raise DimMismatch(f"features have dim {x.shape[1]}, mixture has {gmm.dim}")
    loglik, _ = _loglik_and_resp(_gmm_log_densities(gmm, x))
    return loglik


def n_parameters(k: int, dim: int) -> int:
    """Free parameters of a k-component full-covariance mixture."""
    return (k - 1) + k * dim + k * dim * (dim + 1) // 2


def aic(gmm: Gmm, x) -> float:
    """Akaike information criterion, ``2 * params - 2 * loglik``."""
    return 2.0 * n_parameters(gmm.k, gmm.dim) - 2.0 * log_likelihood(gmm, x)


@dataclass(frozen=True)
class KneeResult:
    """Chosen component count plus whether the fallback rule fired."""

    k: int
    fallback: bool


def select_k(aic_curve, sensitivity: float = 0.5, skip_prefix: int = 2) -> KneeResult:
    """Pick the knee of a decreasing criterion curve.

    The curve is a sequence of ``(k, value)`` pairs with strictly increasing
    integer k. The first ``skip_prefix`` points are dropped since the initial
    cliff of the curve otherwise dominates. Both axes are min-max normalized,
    the decreasing convex shape is flipped to rising concave, and the knee is
    the first local maximum of the difference curve ``y - x`` whose following
    values dip below that maximum by more than ``sensitivity`` times the mean
    x spacing. When no maximum passes that test the interior maximum of the
    difference curve is returned with ``fallback=True``.
    """
    pairs = list(aic_curve)
    if skip_prefix < 0:
        raise InvalidInput(f"skip_prefix must be >= 0, got {skip_prefix}")
    if not (sensitivity >= 0.0 and math.isfinite(sensitivity)):
        raise InvalidInput(f"sensitivity must be >= 0, got {sensitivity}")
    pairs = pairs[skip_prefix:]
    if len(pairs) < 3:
        raise InsufficientCurve(
            f"need at least 3 curve points after skipping {skip_prefix}, got {len(pairs)}"
        )
    ks = np.array([p[0] for p in pairs], dtype=np.float64)
    ys = np.array([p[1] for p in pairs], dtype=np.float64)
    if np.any(np.diff(ks) <= 0):
        raise InvalidInput("k values must be strictly increasing")
    if not np.all(np.isfinite(ys)):
        raise InvalidInput("curve values must be finite")

    x_n = (ks - ks[0]) / (ks[-1] - ks[0])
    y_span = float(ys.max() - ys.min())
    y_n = (ys - ys.min()) / y_span if y_span > 0.0 else np.zeros_like(ys)
    diff = (y_n.max() - y_n) - x_n

    padded = np.concatenate(([diff[0]], diff, [diff[-1]]))
    is_max = (diff >= padded[:-2]) & (diff >= padded[2:])
    is_min = (diff <= padded[:-2]) & (diff <= padded[2:])
    maxima = np.flatnonzero(is_max)
    minima = np.flatnonzero(is_min)

    mean_spacing = float(np.abs(np.diff(x_n)).mean())
    knee_index = None
    if maxima.size:
        threshold = None
        threshold_index = None
        for i in range(int(maxima[0]), diff.size - 1):
            if is_max[i]:
                threshold = diff[i] - sensitivity * mean_spacing
                threshold_index = i
            if is_min[i]:
                threshold = None
            if threshold is not None and diff[i + 1] < threshold:
                knee_index = threshold_index
                break
    if knee_index is None:
        interior = diff[1:-1]
        return KneeResult(k=int(ks[1 + int(interior.argmax())]), fallback=True)
    return KneeResult(k=int(ks[knee_index]), fallback=False)
