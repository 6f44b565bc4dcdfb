"""Optimal piecewise fits by dynamic programming.

``fit_exact_dp`` minimizes total squared residual over all k-piece models
whose pieces are contiguous index intervals. ``fit_restricted_dp`` solves the
same problem with cut points restricted to a given breakpoint set; it is the
workhorse behind postprocessing, where segments jump in large chunks and the
rank-one update trick does not apply, so segment errors come from direct
solves on prefix-aggregated Gram blocks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .linalg import default_ridge, least_squares, solve_normal_equations
from .model import (
    DataSet,
    FitReport,
    ParameterError,
    Partition,
    PiecewiseLinearModel,
)


@dataclass(frozen=True)
class DpTable:
    """Value table a[i][j] (best j-piece error on the first i rows) and
    predecessor table for path recovery."""

    a: np.ndarray
    back: np.ndarray


def compute_dp_table(dataset: DataSet, k: int, ridge: float | None = None) -> DpTable:
    if not 1 <= k <= dataset.n:
        raise ParameterError(f"piece count k={k} outside [1, n={dataset.n}]")
    lam = default_ridge(dataset) if ridge is None else ridge
    a, back = _kernels.dp_kernel(dataset.x_rows, dataset.y, k, lam)
    return DpTable(a, back)


def _recover_bounds(back: np.ndarray, n: int, k: int) -> np.ndarray:
    bounds = [n]
    for j in range(k, 0, -1):
        bounds.append(int(back[bounds[-1], j]))
    return np.array(bounds[::-1], dtype=np.int64)


def refit_partition(
    dataset: DataSet, partition: Partition, ridge: float | None = None
) -> tuple[PiecewiseLinearModel, float, np.ndarray]:
    """Per-interval least-squares refit; returns model, total and per-piece SSE."""
    lam = default_ridge(dataset) if ridge is None else ridge
    thetas = np.empty((partition.piece_count, dataset.d))
    piece_sse = np.empty(partition.piece_count)
    for i, (lo, hi) in enumerate(partition.intervals()):
        thetas[i], piece_sse[i] = least_squares(dataset, (lo, hi), ridge=lam)
    return PiecewiseLinearModel(partition, thetas), float(np.sum(piece_sse)), piece_sse


def fit_exact_dp(dataset: DataSet, k: int, ridge: float | None = None) -> FitReport:
    """Globally optimal k-piece fit over all index-interval partitions.

    Streams interval errors column by column while filling the DP table, so
    memory stays O(n d^2 + n k) at any n. Ties in the recurrence pick the
    smallest predecessor (longest final piece). The model always has exactly
    k pieces, each with at least one point.
    """
    t0 = time.perf_counter()
    table = compute_dp_table(dataset, k, ridge)
    bounds = _recover_bounds(table.back, dataset.n, k)
    model, sse, _ = refit_partition(dataset, Partition(bounds), ridge)
    return FitReport(model=model, sse=sse, wall_time=time.perf_counter() - t0)


def _segment_error_matrix(
    dataset: DataSet, grid: np.ndarray, lam: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Least-squares error for every grid segment pair, via prefix Grams."""
    x, yv = dataset.x_rows, dataset.y
    g = len(grid)
    d = dataset.d
    pg = np.zeros((g, d, d))
    pb = np.zeros((g, d))
    py = np.zeros(g)
    for t in range(1, g):
        lo, hi = grid[t - 1], grid[t]
        xs = x[lo:hi]
        pg[t] = pg[t - 1] + xs.T @ xs
        pb[t] = pb[t - 1] + xs.T @ yv[lo:hi]
        py[t] = py[t - 1] + float(yv[lo:hi] @ yv[lo:hi])
    errs = np.full((g, g), np.inf)
    for p in range(g - 1):
        for q in range(p + 1, g):
            G = pg[q] - pg[p]
            b = pb[q] - pb[p]
            th = solve_normal_equations(G, b, lam)
            errs[p, q] = max(py[q] - py[p] - 2.0 * float(th @ b) + float(th @ (G @ th)), 0.0)
    return errs, pg, pb, py


def fit_restricted_dp(
    dataset: DataSet,
    allowed_breakpoints: Iterable[int],
    pieces: int,
    ridge: float | None = None,
) -> FitReport:
    """Optimal ``pieces``-piece fit with cuts restricted to the given set.

    ``allowed_breakpoints`` are interior row indices in {1..n-1}; the grid is
    completed with 0 and n. With the full index set this reproduces the
    unrestricted DP objective.
    """
    t0 = time.perf_counter()
    n = dataset.n
    allowed = np.unique(np.asarray(list(allowed_breakpoints), dtype=np.int64))
    if allowed.size and (allowed[0] < 1 or allowed[-1] > n - 1):
        raise ParameterError("allowed breakpoints must lie in {1..n-1}")
    grid = np.concatenate(([0], allowed, [n]))
    if not 1 <= pieces <= len(grid) - 1:
        raise ParameterError(
            f"pieces={pieces} unattainable with {len(grid) - 2} allowed breakpoints"
        )
    lam = default_ridge(dataset) if ridge is None else ridge
    errs, *_ = _segment_error_matrix(dataset, grid, lam)

    g = len(grid)
    a = np.full((g, pieces + 1), np.inf)
    a[0, 0] = 0.0
    back = np.zeros((g, pieces + 1), dtype=np.int64)
    for q in range(1, g):
        cand = a[:q, : pieces] + errs[:q, q, None]
        best = np.argmin(cand, axis=0)
        a[q, 1:] = cand[best, np.arange(pieces)]
        back[q, 1:] = best

    cuts = [g - 1]
    for j in range(pieces, 0, -1):
        cuts.append(int(back[cuts[-1], j]))
    bounds = grid[np.array(cuts[::-1])]
    model, sse, _ = refit_partition(dataset, Partition(bounds), lam)
    return FitReport(model=model, sse=sse, wall_time=time.perf_counter() - t0)
