"""Distribution distances between two sets of image features.

Three distances are exposed: ``fid`` (single-Gaussian transport cost),
``wam_squared`` (mixture transport cost on optionally log-scaled features),
and ``kid`` (unbiased squared MMD with a cubic polynomial kernel). Moment
losses and perturbation sensitivity ratios support ablation-style comparisons
between the distances.
"""

from __future__ import annotations

import enum
import hashlib
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimMismatch,
    DivisionDomain,
    InsufficientSamples,
    InvalidInput,
    NumericalError,
)
from .gaussian import _as_feature_matrix, fit_gaussian, w2_squared
from .gmm import EmConfig, Gmm, TransformInfo, fit_gmm, log_transform
from .linalg import trace_sqrt_product
from .transport import TransportPlan, mw2_squared

__all__ = [
    "Metric",
    "MetricReport",
    "WamResult",
    "MomentLosses",
    "SensitivityRatios",
    "SampleSizeWarning",
    "RECOMMENDED_MIN_SAMPLES",
    "fid",
    "wam_squared",
    "kid",
    "moment_losses",
    "sensitivity_ratios",
]

RECOMMENDED_MIN_SAMPLES = 10000

_KID_ROW_BLOCK = 256


class SampleSizeWarning(UserWarning):
    """Fewer samples than the calibration the distances were tuned for."""


class Metric(str, enum.Enum):
    FID = "fid"
    WAM2 = "wam2"
    KID = "kid"
    RATIO = "ratio"


@dataclass(frozen=True)
class MetricReport:
    """One metric evaluation: value, sample sizes, and a config fingerprint."""

    metric: Metric
    value: float
    sample_sizes: tuple[int, int]
    config_digest: str
    notes: str = ""


@dataclass(frozen=True)
class WamResult:
    """Mixture distance report plus the fitted mixtures and the coupling."""

    report: MetricReport
    gmm_a: Gmm
    gmm_b: Gmm
    plan: TransportPlan


class MomentLosses(NamedTuple):
    l_mean: float
    l_cov: float
    l_meancov: float
    l_w2cov: float


class SensitivityRatios(NamedTuple):
    r_first: float
    r_second: float
    r: float


def config_digest(config: dict) -> str:
    """Short stable fingerprint of a configuration mapping."""
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _check_pair(x_a, x_b):
    x_a = _as_feature_matrix(x_a, "x_a")
    x_b = _as_feature_matrix(x_b, "x_b")
    if x_a.shape[1] != x_b.shape[1]:
        raise DimMismatch(
            f"feature dims differ: {x_a.shape[1]} vs {x_b.shape[1]}"
        )
    smallest = min(x_a.shape[0], x_b.shape[0])
    if smallest < RECOMMENDED_MIN_SAMPLES:
        warnings.warn(
            f"{smallest} samples is below the recommended {RECOMMENDED_MIN_SAMPLES}; "
            "distance estimates will be noisy",
            SampleSizeWarning,
            stacklevel=3,
        )
    return x_a, x_b


def fid(x_a, x_b, ddof: int = 1) -> MetricReport:
    """Gaussian transport cost between the moments of two feature sets.

    Each set is summarized by its sample mean and covariance (``ddof=1`` by
    convention) and the closed-form squared transport distance between those
    two Gaussians is returned.
    """
    x_a, x_b = _check_pair(x_a, x_b)
    value = w2_squared(fit_gaussian(x_a, ddof=ddof), fit_gaussian(x_b, ddof=ddof))
    return MetricReport(
        metric=Metric.FID,
        value=value,
        sample_sizes=(x_a.shape[0], x_b.shape[0]),
        config_digest=config_digest({"metric": "FID", "ddof": ddof}),
    )


def wam_squared(
    x_a,
    x_b,
    k_a: int,
    k_b: int,
    config: EmConfig | None = None,
    log: bool = True,
    epsilon: float = 1e-6,
    threads: int | None = None,
) -> WamResult:
    """Squared mixture transport distance between two feature sets.

    Features are log-scaled by default (they are assumed nonnegative, as
    post-activation features are), one mixture is fitted per side with the
    given component counts, and the exact coupling between the mixtures is
    solved. The squared distance, both mixtures, and the coupling are all
    returned so callers can audit the fit.
    """
    config = config or EmConfig()
    x_a, x_b = _check_pair(x_a, x_b)
    info = TransformInfo(log=log, epsilon=epsilon)
    if log:
        x_a = log_transform(x_a, epsilon)
        x_b = log_transform(x_b, epsilon)
    gmm_a = fit_gmm(x_a, k_a, config).with_transform(info)
    gmm_b = fit_gmm(x_b, k_b, config).with_transform(info)
    value, plan = mw2_squared(gmm_a, gmm_b, threads=threads)
    digest = config_digest(
        {
            "metric": "WAM2",
            "k_a": k_a,
            "k_b": k_b,
            "seed": config.seed,
            "max_iter": config.max_iter,
            "rel_tol": config.rel_tol,
            "reg_covar": config.reg_covar,
            "n_init": config.n_init,
            "log": log,
            "epsilon": epsilon,
        }
    )
    report = MetricReport(
        metric=Metric.WAM2,
        value=value,
        sample_sizes=(x_a.shape[0], x_b.shape[0]),
        config_digest=digest,
    )
    return WamResult(report=report, gmm_a=gmm_a, gmm_b=gmm_b, plan=plan)


def _poly3_kernel_sums(x, y, threads: int | None):
    """Full-sum and diagonal-sum of the cubic kernel Gram matrix.

    Rows of ``x`` are processed in fixed-size blocks and the per-block sums
    are reduced in block order, so the result does not depend on how many
    workers computed the blocks.
    """
    d = x.shape[1]
    starts = range(0, x.shape[0], _KID_ROW_BLOCK)

    def block_sum(start: int) -> float:
        gram = ((x[start : start + _KID_ROW_BLOCK] @ y.T) / d + 1.0) ** 3
        return float(gram.sum())

    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(block_sum, starts))
    else:
        partials = [block_sum(s) for s in starts]
    return sum(partials)


def _poly3_diag_sum(x) -> float:
    d = x.shape[1]
    return float((((x * x).sum(axis=1) / d + 1.0) ** 3).sum())


def _kid_value(x_a, x_b, threads: int | None) -> float:
    m, n = x_a.shape[0], x_b.shape[0]
    s_aa = _poly3_kernel_sums(x_a, x_a, threads) - _poly3_diag_sum(x_a)
    s_bb = _poly3_kernel_sums(x_b, x_b, threads) - _poly3_diag_sum(x_b)
    s_ab = _poly3_kernel_sums(x_a, x_b, threads)
    return s_aa / (m * (m - 1)) + s_bb / (n * (n - 1)) - 2.0 * s_ab / (m * n)


def kid(
    x_a,
    x_b,
    block_size: int | None = None,
    threads: int | None = None,
) -> MetricReport:
    """Unbiased squared MMD with the kernel ``(x . y / d + 1)^3``.

    The unbiased estimator omits self-pairs, so small negative values are a
    legitimate outcome when the two sets are draws from one distribution.
    With ``block_size`` set, disjoint aligned row blocks are scored separately
    and the mean is reported, with the per-block spread recorded in notes.
    """
    x_a, x_b = _check_pair(x_a, x_b)
    m, n = x_a.shape[0], x_b.shape[0]
    if m < 2 or n < 2:
        raise InsufficientSamples("the unbiased estimator needs >= 2 rows per side")
    notes = ""
    if block_size is None:
        value = _kid_value(x_a, x_b, threads)
    else:
        if block_size < 2:
            raise InvalidInput(f"block_size must be >= 2, got {block_size}")
        blocks = min(m, n) // block_size
        if blocks < 1:
            raise InsufficientSamples(
                f"block_size {block_size} exceeds the smaller side ({min(m, n)} rows)"
            )
        per_block = [
            _kid_value(
                x_a[t * block_size : (t + 1) * block_size],
                x_b[t * block_size : (t + 1) * block_size],
                threads,
            )
            for t in range(blocks)
        ]
        value = float(np.mean(per_block))
        notes = f"blocks={blocks} block_std={float(np.std(per_block)):.6g}"
    return MetricReport(
        metric=Metric.KID,
        value=value,
        sample_sizes=(m, n),
        config_digest=config_digest(
            {"metric": "KID", "kernel": "poly3", "block_size": block_size}
        ),
        notes=notes,
    )


def moment_losses(mean, cov, ref_mean, ref_cov) -> MomentLosses:
    """Distances between two moment pairs under four conventions.

    ``l_mean`` is the squared Euclidean distance between means, ``l_cov`` the
    Frobenius distance between covariances (not squared), ``l_meancov`` their
    half sum, and ``l_w2cov`` the covariance part of the Gaussian transport
    cost, which unlike ``l_cov`` compares covariances on the transport
    geometry.
    """
    mean = np.asarray(mean, dtype=np.float64)
    ref_mean = np.asarray(ref_mean, dtype=np.float64)
    if mean.ndim != 1 or mean.shape != ref_mean.shape:
        raise DimMismatch(
            f"mean shapes differ or are not vectors: {mean.shape} vs {ref_mean.shape}"
        )
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(ref_mean))):
        raise InvalidInput("means contain non-finite entries")
    cov = np.asarray(cov, dtype=np.float64)
    ref_cov = np.asarray(ref_cov, dtype=np.float64)
    if cov.shape != (mean.size, mean.size) or ref_cov.shape != cov.shape:
        raise DimMismatch("covariance shapes do not match the means")

    delta = mean - ref_mean
    l_mean = float(delta @ delta)
    l_cov = float(np.linalg.norm(cov - ref_cov, ord="fro"))
    l_meancov = 0.5 * (l_mean + l_cov)
    tr_a = float(np.trace(cov))
    tr_b = float(np.trace(ref_cov))
    l_w2cov = tr_a + tr_b - 2.0 * trace_sqrt_product(cov, ref_cov)
    if l_w2cov < 0.0:
        if l_w2cov < -1e-8 * max(1.0, tr_a + tr_b):
            raise NumericalError(f"covariance cost cancelled to {l_w2cov:.3g}")
        l_w2cov = 0.0
    return MomentLosses(l_mean, l_cov, l_meancov, l_w2cov)


def _positive_value(report: MetricReport, name: str) -> float:
    value = report.value
    if not np.isfinite(value) or value <= 0.0:
        raise DivisionDomain(f"{name} must be positive to form a ratio, got {value!r}")
    return value


def sensitivity_ratios(
    orig: MetricReport,
    pert: MetricReport,
    orig_other: MetricReport,
    pert_other: MetricReport,
) -> SensitivityRatios:
    """How much more one metric inflates under a perturbation than another.

    ``r_first`` is the perturbed-over-original ratio of the first metric,
    ``r_second`` the same for the second metric, and ``r`` their quotient.
    ``r > 1`` means the first metric amplified the perturbation more.
    """
    if orig.metric != pert.metric:
        raise InvalidInput(
            f"first pair mixes metrics: {orig.metric.value} vs {pert.metric.value}"
        )
    if orig_other.metric != pert_other.metric:
        raise InvalidInput(
            f"second pair mixes metrics: {orig_other.metric.value} vs {pert_other.metric.value}"
        )
    for report, name in ((pert, "pert"), (pert_other, "pert_other")):
        if not np.isfinite(report.value):
            raise InvalidInput(f"{name} value is not finite")
    r_first = pert.value / _positive_value(orig, "orig")
    r_second = pert_other.value / _positive_value(orig_other, "orig_other")
    if r_second == 0.0:
        raise DivisionDomain("second ratio is zero; the quotient is undefined")
    return SensitivityRatios(r_first, r_second, r_first / r_second)
