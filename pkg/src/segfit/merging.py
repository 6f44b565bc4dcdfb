"""Fast segmented-regression estimators built on greedy interval merging.

Both merging loops start from singleton intervals and repeatedly pair
adjacent intervals, score each candidate merge by the least-squares error of
the merged fit, keep the worst-scoring candidates unmerged and merge the
rest. The plain variant compares bias-corrected errors (squared residual
minus noise_var * length) globally; the bucketed variant compares average
errors only among candidates of similar length, which removes the need to
know the noise variance. Postprocessing compresses any coarse partition to
exactly 2k+1 pieces with the restricted dynamic program.

Candidate scoring runs on prefix-aggregated Gram blocks, so one iteration
costs O(pairs * d^3) after an O(n d^2) setup and the whole fit stays
near-linear in n.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .estimators import fit_restricted_dp, refit_partition
from .linalg import default_ridge
from .model import (
    DataSet,
    FitReport,
    ParameterError,
    Partition,
    StructuralError,
)

_CEIL_FUZZ = 1e-9


def _ceil(v: float) -> int:
    return math.ceil(v - _CEIL_FUZZ)


@dataclass(frozen=True)
class MergeConfig:
    """Tuning for the plain greedy merge.

    ``k`` is the target true piece count; the loop stops once at most
    ceil((2 + 2/tau) k + gamma) intervals remain, keeping the
    ceil((1 + 1/tau) k) highest-error candidates unmerged per iteration.
    ``noise_var`` is the second moment of the noise (s^2); zero disables the
    bias correction.
    """

    k: int
    tau: float = 1.0
    gamma: float = 2.0
    noise_var: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ParameterError(f"tau must be finite and > 0, got {self.tau}")
        if not math.isfinite(self.gamma):
            raise ParameterError(f"gamma must be finite, got {self.gamma}")
        if not (math.isfinite(self.noise_var) and self.noise_var >= 0):
            raise ParameterError(f"noise_var must be finite and >= 0, got {self.noise_var}")
        if self.piece_threshold < 2:
            raise ParameterError(
                f"stopping threshold (2 + 2/tau) k + gamma = {self.piece_threshold} < 2"
            )

    @property
    def piece_threshold(self) -> int:
        return _ceil((2.0 + 2.0 / self.tau) * self.k + self.gamma)

    @property
    def keep_count(self) -> int:
        return _ceil((1.0 + 1.0 / self.tau) * self.k)


@dataclass
class CandidatePair:
    """Two adjacent intervals considered for merging."""

    left: int
    right: int
    merged_interval: tuple[int, int]
    error: float = math.nan


def pair_candidates(partition: Partition) -> tuple[list[CandidatePair], int | None]:
    """Pair consecutive intervals (0,1), (2,3), ...

    An odd interval count leaves the final interval unpaired; its index is
    returned as the carryover and it passes to the next iteration untouched.
    """
    m = partition.piece_count
    bounds = partition.bounds
    pairs = [
        CandidatePair(2 * u, 2 * u + 1, (int(bounds[2 * u]), int(bounds[2 * u + 2])))
        for u in range(m // 2)
    ]
    carryover = m - 1 if m % 2 == 1 else None
    return pairs, carryover


def select_top_errors(
    candidates: list[CandidatePair], count: int
) -> tuple[set[int], set[int]]:
    """Indices of the ``count`` largest-error candidates, and the rest.

    Ties break toward the smaller interval start so selection is
    deterministic.
    """
    if count < 0:
        raise ParameterError(f"count must be >= 0, got {count}")
    if count >= len(candidates):
        return set(range(len(candidates))), set()
    errors = np.array([c.error for c in candidates])
    starts = np.array([c.merged_interval[0] for c in candidates])
    order = np.lexsort((starts, -errors))
    kept = set(int(i) for i in order[:count])
    return kept, set(range(len(candidates))) - kept


class _PrefixGrams:
    """Cumulative Gram blocks over row prefixes for batched segment fits."""

    def __init__(self, dataset: DataSet, ridge: float):
        x, y = dataset.x_rows, dataset.y
        n, d = x.shape
        self.d = d
        self.ridge = ridge
        self.pg = np.zeros((n + 1, d, d))
        np.cumsum(np.einsum("ni,nj->nij", x, x), axis=0, out=self.pg[1:])
        self.pb = np.zeros((n + 1, d))
        np.cumsum(x * y[:, None], axis=0, out=self.pb[1:])
        self.py = np.zeros(n + 1)
        np.cumsum(y * y, out=self.py[1:])

    def segment_sse(self, los: np.ndarray, his: np.ndarray) -> np.ndarray:
        """Squared residual of the least-squares fit on each [lo, hi)."""
        G = self.pg[his] - self.pg[los]
        b = self.pb[his] - self.pb[los]
        th = np.linalg.solve(G + self.ridge * np.eye(self.d), b[..., None])[..., 0]
        sse = (
            self.py[his]
            - self.py[los]
            - 2.0 * np.einsum("md,md->m", th, b)
            + np.einsum("mi,mij,mj->m", th, G, th)
        )
        return np.maximum(sse, 0.0)


def score_candidates(
    prefix: _PrefixGrams, pairs: list[CandidatePair], noise_var: float, average: bool
) -> None:
    """Fill each candidate's merge criterion in place.

    Plain criterion: merged-fit SSE minus noise_var times merged length.
    Average criterion: merged-fit SSE divided by merged length.
    """
    if not pairs:
        return
    los = np.array([p.merged_interval[0] for p in pairs])
    his = np.array([p.merged_interval[1] for p in pairs])
    sse = prefix.segment_sse(los, his)
    lens = (his - los).astype(np.float64)
    errs = sse / lens if average else sse - noise_var * lens
    for p, e in zip(pairs, errs):
        p.error = float(e)


def _merge_selected(partition: Partition, merged: set[int]) -> Partition:
    """Drop the internal boundary of each merged pair."""
    if not merged:
        return partition
    drop = np.array(sorted(2 * u + 1 for u in merged))
    return Partition(np.delete(partition.bounds, drop))


def _greedy_partition(dataset: DataSet, config: MergeConfig) -> tuple[Partition, int]:
    lam = default_ridge(dataset)
    prefix = _PrefixGrams(dataset, lam)
    part = Partition.singletons(dataset.n)
    threshold = config.piece_threshold
    iterations = 0
    while part.piece_count > threshold:
        pairs, _ = pair_candidates(part)
        score_candidates(prefix, pairs, config.noise_var, average=False)
        # When every pair would be kept, merge the single lowest-error pair
        # instead so the loop always makes progress toward the threshold.
        keep = config.keep_count if len(pairs) > config.keep_count else len(pairs) - 1
        _, merged = select_top_errors(pairs, keep)
        part = _merge_selected(part, merged)
        iterations += 1
    return part, iterations


def greedy_merge(dataset: DataSet, config: MergeConfig) -> FitReport:
    """Greedy pair merging with the bias-corrected error criterion.

    Returns a model with at most ceil((2 + 2/tau) k + gamma) pieces; the
    final coefficients are fresh per-interval least-squares fits.
    """
    t0 = time.perf_counter()
    part, _ = _greedy_partition(dataset, config)
    model, sse, _ = refit_partition(dataset, part)
    return FitReport(model=model, sse=sse, wall_time=time.perf_counter() - t0)


def bucket_piece_threshold(k: int, gamma: float, n: int) -> int:
    return _ceil((2.0 * (k + 1) + gamma) * math.ceil(math.log2(n)))


def _bucket_partition(dataset: DataSet, k: int, gamma: float) -> tuple[Partition, int]:
    lam = default_ridge(dataset)
    prefix = _PrefixGrams(dataset, lam)
    part = Partition.singletons(dataset.n)
    threshold = bucket_piece_threshold(k, gamma, dataset.n)
    iterations = 0
    while part.piece_count > threshold:
        pairs, _ = pair_candidates(part)
        score_candidates(prefix, pairs, 0.0, average=True)
        lens = np.array([p.merged_interval[1] - p.merged_interval[0] for p in pairs])
        alphas = np.floor(np.log2(lens)).astype(np.int64)
        merged_all: set[int] = set()
        for alpha in np.unique(alphas):
            idx = np.where(alphas == alpha)[0]
            bucket = [pairs[i] for i in idx]
            _, merged = select_top_errors(bucket, k + 1)
            merged_all.update(int(idx[i]) for i in merged)
        if not merged_all:
            # Every bucket is saturated; merge the single lowest-error pair
            # so the loop always terminates.
            _, merged = select_top_errors(pairs, len(pairs) - 1)
            merged_all = {int(i) for i in merged}
        part = _merge_selected(part, merged_all)
        iterations += 1
    return part, iterations


def bucket_greedy_merge(dataset: DataSet, k: int, gamma: float = 2.0) -> FitReport:
    """Greedy merging with length buckets and the average-error criterion.

    Needs no noise-variance input: candidates are compared only against
    like-sized candidates (bucket alpha holds merged lengths in
    [2^alpha, 2^(alpha+1))), keeping the k+1 largest average errors per
    bucket unmerged. Stops at (2(k+1)+gamma) ceil(log2 n) pieces.
    """
    if dataset.n < 2:
        raise ParameterError("bucket merging needs n >= 2")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ParameterError(f"gamma must be finite and >= 0, got {gamma}")
    t0 = time.perf_counter()
    part, _ = _bucket_partition(dataset, k, gamma)
    model, sse, _ = refit_partition(dataset, part)
    return FitReport(model=model, sse=sse, wall_time=time.perf_counter() - t0)


def postprocess(dataset: DataSet, coarse: Partition, k: int) -> FitReport:
    """Compress a coarse partition to exactly 2k+1 pieces.

    Runs the restricted dynamic program over the coarse partition's interior
    breakpoints. If the coarse partition already has fewer than 2k+1 pieces
    there is nothing to compress: its per-interval refit is returned
    unchanged with a warning flag.
    """
    t0 = time.perf_counter()
    if coarse.n != dataset.n:
        raise StructuralError(f"coarse partition covers {coarse.n} rows, dataset has {dataset.n}")
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    target = 2 * k + 1
    if coarse.piece_count < target:
        model, sse, _ = refit_partition(dataset, coarse)
        return FitReport(
            model=model,
            sse=sse,
            wall_time=time.perf_counter() - t0,
            warning=f"coarse partition has {coarse.piece_count} < {target} pieces; refit unchanged",
        )
    report = fit_restricted_dp(dataset, coarse.bounds[1:-1], target)
    return replace(report, wall_time=time.perf_counter() - t0)


def estimate_noise_var(y: np.ndarray) -> float:
    """Crude noise-variance estimate: half the mean squared first difference.

    Exact in expectation when the signal is locally constant; treat it as a
    fallback when no variance estimate is available.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] < 2:
        raise ParameterError("noise estimation needs at least two samples")
    dy = np.diff(y)
    return float(dy @ dy) / (2.0 * dy.shape[0])
