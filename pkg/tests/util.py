"""Shared random-object builders for the test suite."""

from __future__ import annotations

import numpy as np

from wamkit import FitMeta, Gaussian, Gmm
from wamkit.linalg import symmetrize


def rand_psd(rng, dim: int, scale: float = 1.0, jitter: float = 0.1) -> np.ndarray:
    a = rng.normal(scale=scale, size=(dim, dim))
    return symmetrize(a @ a.T + jitter * np.eye(dim))


def rand_gaussian(rng, dim: int, mean_scale: float = 1.0) -> Gaussian:
    return Gaussian(rng.normal(scale=mean_scale, size=dim), rand_psd(rng, dim))


def make_gmm(weights, components) -> Gmm:
    weights = np.asarray(weights, dtype=float)
    return Gmm(
        weights=weights,
        components=tuple(components),
        meta=FitMeta(seed=0, iterations=0, loglik=0.0),
    )


def rand_gmm(rng, dim: int, k: int) -> Gmm:
    weights = rng.dirichlet(np.ones(k))
    return make_gmm(weights, [rand_gaussian(rng, dim) for _ in range(k)])
