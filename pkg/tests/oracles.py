"""Independent reference implementations used only by the tests.

Everything here is written the slow, obvious way (explicit loops, exhaustive
enumeration) on purpose, so a bug in the library cannot hide in a shared code
path. Nothing in this module imports package internals beyond its public API
surface, and most functions avoid the package entirely.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np


# ---------------------------------------------------------------------------
# Optimal transport by exhaustive vertex enumeration.
#
# A basic feasible solution of the transportation polytope corresponds to a
# spanning tree of the bipartite supply/demand graph with m + n - 1 cells.
# Enumerating every such tree and keeping the feasible ones visits every
# vertex of the polytope, so the best of them is the exact optimum.
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _tree_schedules(m: int, n: int):
    """All spanning-tree cell subsets for an m x n problem, with the leaf
    elimination order baked in as (cell_index_in_subset, kind, node) steps."""
    cells = [(i, j) for i in range(m) for j in range(n)]
    need = m + n - 1
    schedules = []
    for subset in itertools.combinations(range(len(cells)), need):
        chosen = [cells[t] for t in subset]
        row_deg = [0] * m
        col_deg = [0] * n
        for i, j in chosen:
            row_deg[i] += 1
            col_deg[j] += 1
        remaining = set(range(need))
        row_deg = row_deg[:]
        col_deg = col_deg[:]
        steps = []
        progress = True
        while remaining and progress:
            progress = False
            for t in list(remaining):
                i, j = chosen[t]
                if row_deg[i] == 1:
                    steps.append((t, "r", i))
                    remaining.discard(t)
                    row_deg[i] -= 1
                    col_deg[j] -= 1
                    progress = True
                elif col_deg[j] == 1:
                    steps.append((t, "c", j))
                    remaining.discard(t)
                    row_deg[i] -= 1
                    col_deg[j] -= 1
                    progress = True
        if not remaining:
            schedules.append((tuple(chosen), tuple(steps)))
    return schedules


def ot_cost_by_enumeration(cost, a, b, tol: float = 1e-12) -> float:
    """Exact minimum transport cost by visiting every polytope vertex."""
    cost = np.asarray(cost, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = cost.shape
    best = math.inf
    for chosen, steps in _tree_schedules(m, n):
        supply = list(a)
        demand = list(b)
        alloc = [0.0] * len(chosen)
        feasible = True
        for t, kind, node in steps:
            i, j = chosen[t]
            amount = supply[i] if kind == "r" else demand[j]
            if amount < -tol:
                feasible = False
                break
            alloc[t] = amount
            supply[i] -= amount
            demand[j] -= amount
        if not feasible:
            continue
        if min(alloc) < -tol:
            continue
        total = sum(cost[c] * max(v, 0.0) for c, v in zip(chosen, alloc))
        if total < best:
            best = total
    return best


# ---------------------------------------------------------------------------
# Knee location, transcribed step by step from the original description of
# the algorithm: normalize, flip the convex decreasing curve, difference
# curve, local maxima with a sensitivity-scaled threshold.
# ---------------------------------------------------------------------------


def kneedle_decreasing_convex(ks, ys, sensitivity: float):
    """Returns the knee k, or None when no maximum passes the threshold."""
    ks = [float(v) for v in ks]
    ys = [float(v) for v in ys]
    count = len(ks)
    x_n = [(v - ks[0]) / (ks[-1] - ks[0]) for v in ks]
    lo, hi = min(ys), max(ys)
    span = hi - lo
    y_n = [(v - lo) / span if span > 0 else 0.0 for v in ys]
    flipped = [max(y_n) - v for v in y_n]
    diff = [flipped[t] - x_n[t] for t in range(count)]

    def clip(idx):
        return min(max(idx, 0), count - 1)

    maxima = [
        t
        for t in range(count)
        if diff[t] >= diff[clip(t - 1)] and diff[t] >= diff[clip(t + 1)]
    ]
    minima = [
        t
        for t in range(count)
        if diff[t] <= diff[clip(t - 1)] and diff[t] <= diff[clip(t + 1)]
    ]
    if not maxima:
        return None
    spacing = sum(
        abs(x_n[t + 1] - x_n[t]) for t in range(count - 1)
    ) / (count - 1)
    threshold = None
    threshold_at = None
    for t in range(maxima[0], count - 1):
        if t in maxima:
            threshold = diff[t] - sensitivity * spacing
            threshold_at = t
        if t in minima:
            threshold = None
        if threshold is not None and diff[t + 1] < threshold:
            return ks[threshold_at]
    return None


# ---------------------------------------------------------------------------
# Brute-force kernel distance: three explicit loops, scalar arithmetic.
# ---------------------------------------------------------------------------


def kid_bruteforce(x_a, x_b) -> float:
    x_a = np.asarray(x_a, dtype=float)
    x_b = np.asarray(x_b, dtype=float)
    m, d = x_a.shape
    n = x_b.shape[0]

    def kern(u, v) -> float:
        dot = 0.0
        for t in range(d):
            dot += u[t] * v[t]
        return (dot / d + 1.0) ** 3

    s_aa = 0.0
    for i in range(m):
        for j in range(m):
            if i != j:
                s_aa += kern(x_a[i], x_a[j])
    s_bb = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s_bb += kern(x_b[i], x_b[j])
    s_ab = 0.0
    for i in range(m):
        for j in range(n):
            s_ab += kern(x_a[i], x_b[j])
    return s_aa / (m * (m - 1)) + s_bb / (n * (n - 1)) - 2.0 * s_ab / (m * n)


# ---------------------------------------------------------------------------
# Scalar closed forms for the Gaussian transport cost.
# ---------------------------------------------------------------------------


def w2_squared_1d(mean1, var1, mean2, var2) -> float:
    return (mean1 - mean2) ** 2 + (math.sqrt(var1) - math.sqrt(var2)) ** 2


def w2_squared_diagonal(mean1, diag1, mean2, diag2) -> float:
    total = 0.0
    for m1, v1, m2, v2 in zip(mean1, diag1, mean2, diag2):
        total += (m1 - m2) ** 2 + (math.sqrt(v1) - math.sqrt(v2)) ** 2
    return total


# ---------------------------------------------------------------------------
# Kolmogorov survival series, summed far past the truncation point.
# ---------------------------------------------------------------------------


def kolmogorov_pvalue_series(lam: float, terms: int = 200) -> float:
    total = 0.0
    for j in range(1, terms + 1):
        total += 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
    return min(max(total, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Dense-grid sup-norm evaluation of the KS distance.
# ---------------------------------------------------------------------------


def ks_statistic_grid(sorted_samples, cdf_fn, grid_points: int = 200001) -> float:
    samples = np.asarray(sorted_samples, dtype=float)
    n = samples.size
    lo = samples[0] - 1.0
    hi = samples[-1] + 1.0
    grid = np.unique(np.concatenate([np.linspace(lo, hi, grid_points), samples]))
    ref = np.asarray(cdf_fn(grid), dtype=float)
    ecdf_right = np.searchsorted(samples, grid, side="right") / n
    ecdf_left = np.searchsorted(samples, grid, side="left") / n
    return float(
        np.maximum(np.abs(ecdf_right - ref), np.abs(ecdf_left - ref)).max()
    )
