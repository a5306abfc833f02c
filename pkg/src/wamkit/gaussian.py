"""Gaussian moment estimates and the closed-form transport cost between them.

The squared 2-Wasserstein distance between two Gaussians has the closed form

    ``|m1 - m2|^2 + tr(C1) + tr(C2) - 2 tr((C1^{1/2} C2 C1^{1/2})^{1/2})``

which this module evaluates through :func:`wamkit.linalg.trace_sqrt_product`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, InsufficientSamples, InvalidInput, NumericalError
from .linalg import symmetrize, trace_sqrt_product

__all__ = ["Gaussian", "fit_gaussian", "w2_squared"]


@dataclass(frozen=True, eq=False)
class Gaussian:
    """Mean vector and exactly symmetric covariance matrix."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1 or mean.size == 0:
            raise InvalidInput(f"mean must be a nonempty vector, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise DimMismatch(
                f"covariance shape {cov.shape} does not match mean dim {mean.size}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidInput("Gaussian parameters contain non-finite entries")
        if not np.array_equal(cov, cov.T):
            raise InvalidInput("covariance is not exactly symmetric; apply symmetrize()")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


def _as_feature_matrix(x, name: str = "features") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] == 0:
        raise InvalidInput(f"{name} must be a 2-D matrix with at least one column")
    if not np.all(np.isfinite(x)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return x


def fit_gaussian(x, ddof: int = 1) -> Gaussian:
    """Sample mean and covariance of a feature matrix (rows are samples).

    ``ddof=1`` gives the unbiased n-1 denominator used for distribution
    distances on features; ``ddof=0`` gives the maximum-likelihood estimate.
    """
    x = _as_feature_matrix(x)
    n = x.shape[0]
    if n < 2:
        raise InsufficientSamples(f"need at least 2 rows to fit a Gaussian, got {n}")
    if ddof not in (0, 1):
        raise InvalidInput(f"ddof must be 0 or 1, got {ddof}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = symmetrize(centered.T @ centered / (n - ddof))
    return Gaussian(mean, cov)


def w2_squared(g1: Gaussian, g2: Gaussian) -> float:
    """Squared 2-Wasserstein distance between two Gaussians.

    Mathematically nonnegative. The value is a difference of traces, so
    cancellation noise scales with the traces themselves; negatives within
    1e-8 of that scale are clamped to zero, anything more negative raises
    :class:`NumericalError`.
    """
    if g1.dim != g2.dim:
        raise DimMismatch(f"dim mismatch: {g1.dim} vs {g2.dim}")
    delta = g1.mean - g2.mean
    tr1 = float(np.trace(g1.cov))
    tr2 = float(np.trace(g2.cov))
    value = float(delta @ delta) + tr1 + tr2 - 2.0 * trace_sqrt_product(g1.cov, g2.cov)
    if value < 0.0:
        if value < -1e-8 * max(1.0, tr1 + tr2):
            raise NumericalError(f"transport cost cancelled to {value:.3g}")
        value = 0.0
    return value
