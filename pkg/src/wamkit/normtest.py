"""Per-marginal Kolmogorov-Smirnov checks against the standard normal.

Feature columns are standardized by their own sample mean and standard
deviation, compared to the normal CDF, and the asymptotic p-value is taken
from the classical alternating series with the small-sample correction
``lambda = D * (sqrt(n) + 0.12 + 0.11 / sqrt(n))``. A column with zero
variance cannot be standardized and is reported as degenerate, which counts
as a rejection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InsufficientSamples, InvalidInput
from .gaussian import _as_feature_matrix

__all__ = [
    "KsResult",
    "NormalityReport",
    "ks_statistic",
    "ks_pvalue",
    "marginal_normality_report",
]

_MIN_ROWS = 8
_SERIES_CUTOFF = 1e-12
# Below this the survival series is 1.0 to double precision and needs ~3.7/lam
# terms to notice, so short-circuit instead of summing them.
_LAMBDA_FLOOR = 0.1


@dataclass(frozen=True)
class KsResult:
    marginal_index: int
    n: int
    statistic: float
    p_value: float
    degenerate: bool = False


class NormalityReport(NamedTuple):
    fraction_rejected: float
    results: tuple[KsResult, ...]


def ks_statistic(samples, cdf) -> float:
    """Sup-distance between the empirical CDF and a reference CDF.

    ``samples`` must be sorted ascending. ``cdf`` is either a callable
    evaluated at the samples or a precomputed vector of the same length.
    The statistic is ``max_i max(i/n - F_i, F_i - (i-1)/n)``, which is the
    exact sup over the step discontinuities of the empirical CDF.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise InsufficientSamples("need a nonempty 1-D sample vector")
    if not np.all(np.isfinite(samples)):
        raise InvalidInput("samples contain non-finite entries")
    if np.any(np.diff(samples) < 0):
        raise InvalidInput("samples must be sorted ascending")
    if callable(cdf):
        f = np.asarray([float(cdf(v)) for v in samples], dtype=np.float64)
    else:
        f = np.asarray(cdf, dtype=np.float64)
        if f.shape != samples.shape:
            raise InvalidInput(
                f"cdf vector shape {f.shape} does not match samples {samples.shape}"
            )
    if not np.all(np.isfinite(f)) or f.min() < 0.0 or f.max() > 1.0:
        raise InvalidInput("cdf values must lie in [0, 1]")
    n = samples.size
    steps = np.arange(1, n + 1) / n
    d_plus = float((steps - f).max())
    d_minus = float((f - steps + 1.0 / n).max())
    return max(d_plus, d_minus, 0.0)


def ks_pvalue(d: float, n: int) -> float:
    """Asymptotic two-sided p-value for a KS statistic on n samples."""
    if not (0.0 <= d <= 1.0) or not math.isfinite(d):
        raise InvalidInput(f"statistic must lie in [0, 1], got {d}")
    if n < 1:
        raise InvalidInput(f"n must be >= 1, got {n}")
    sqrt_n = math.sqrt(n)
    lam = d * (sqrt_n + 0.12 + 0.11 / sqrt_n)
    if lam < _LAMBDA_FLOOR:
        return 1.0
    total = 0.0
    sign = 1.0
    j = 1
    while True:
        term = 2.0 * math.exp(-2.0 * j * j * lam * lam)
        if term < _SERIES_CUTOFF:
            break
        total += sign * term
        sign = -sign
        j += 1
    return min(max(total, 0.0), 1.0)


def _norm_cdf(z: np.ndarray) -> np.ndarray:
    scaled = z / math.sqrt(2.0)
    return np.array([0.5 * (1.0 + math.erf(v)) for v in scaled])


def marginal_normality_report(x, alpha: float = 0.01) -> NormalityReport:
    """Test every feature column for marginal normality.

    Each column is standardized by its own sample mean and standard deviation
    (ddof=1) and compared to the standard normal CDF. Because the reference
    parameters are estimated from the same data the test is conservative, so
    a high rejection fraction is strong evidence against normality while a
    low one is weak evidence for it.
    """
    x = _as_feature_matrix(x)
    n, dim = x.shape
    if n < _MIN_ROWS:
        raise InsufficientSamples(f"need at least {_MIN_ROWS} rows, got {n}")
    if not (0.0 < alpha < 1.0):
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha}")

    results = []
    rejected = 0
    for j in range(dim):
        col = x[:, j]
        std = float(col.std(ddof=1))
        if std == 0.0:
            rejected += 1
            results.append(
                KsResult(
                    marginal_index=j, n=n, statistic=1.0, p_value=0.0, degenerate=True
                )
            )
            continue
        z = np.sort((col - col.mean()) / std)
        stat = ks_statistic(z, _norm_cdf(z))
        p = ks_pvalue(stat, n)
        if p < alpha:
            rejected += 1
        results.append(KsResult(marginal_index=j, n=n, statistic=stat, p_value=p))
    return NormalityReport(
        fraction_rejected=rejected / dim, results=tuple(results)
    )
