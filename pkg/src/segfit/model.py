"""Core domain types for segmented regression.

A dataset is a fixed design matrix plus responses, sorted along one
designated feature column. Models are contiguous index partitions with one
coefficient vector per piece. All types are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class StructuralError(ValueError):
    """Shapes or index structures of inputs are inconsistent."""


class ParameterError(ValueError):
    """A requested parameter is outside its valid range."""


class CapacityError(RuntimeError):
    """A configured memory cap would be exceeded."""


class SingularUpdateError(ArithmeticError):
    """A rank-one inverse update hit a (near-)zero denominator."""


class NonFiniteDataError(ValueError):
    """Input data contains NaN or infinite entries."""


def _as_readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out is a:
        out = out.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DataSet:
    """Fixed-design matrix with responses, sorted by one feature column.

    Rows must be sorted non-decreasing in column ``partition_col`` so that
    index intervals correspond to intervals on the real line. Ties are
    allowed. No row may be the all-zeros vector.
    """

    x_rows: np.ndarray
    y: np.ndarray
    partition_col: int = 0

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x_rows, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).ravel()
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise StructuralError(f"x_rows must be a nonempty 2-d matrix, got shape {x.shape}")
        if y.shape[0] != x.shape[0]:
            raise StructuralError(f"y has length {y.shape[0]}, expected {x.shape[0]}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise NonFiniteDataError("dataset contains NaN or infinite entries")
        if np.any(np.all(x == 0.0, axis=1)):
            raise StructuralError("dataset contains an all-zeros feature row")
        if not 0 <= self.partition_col < x.shape[1]:
            raise ParameterError(f"partition_col {self.partition_col} outside [0, {x.shape[1]})")
        pc = x[:, self.partition_col]
        if np.any(np.diff(pc) < 0):
            raise StructuralError("rows are not sorted by the partition column")
        object.__setattr__(self, "x_rows", _as_readonly(x))
        object.__setattr__(self, "y", _as_readonly(y))

    @property
    def n(self) -> int:
        return self.x_rows.shape[0]

    @property
    def d(self) -> int:
        return self.x_rows.shape[1]


@dataclass(frozen=True)
class Partition:
    """Ordered cover of ``{0..n-1}`` by contiguous half-open index intervals.

    ``bounds`` holds the m+1 cut points ``0 = b_0 < b_1 < ... < b_m = n``;
    piece ``i`` is ``[b_i, b_{i+1})``.
    """

    bounds: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=np.int64).ravel()
        if b.shape[0] < 2:
            raise StructuralError("partition needs at least two bounds")
        if b[0] != 0:
            raise StructuralError("partition must start at index 0")
        if np.any(np.diff(b) <= 0):
            raise StructuralError("partition bounds must be strictly increasing")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "bounds", b)

    @property
    def n(self) -> int:
        return int(self.bounds[-1])

    @property
    def piece_count(self) -> int:
        return len(self.bounds) - 1

    def intervals(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in zip(self.bounds[:-1], self.bounds[1:])]

    @staticmethod
    def singletons(n: int) -> "Partition":
        return Partition(np.arange(n + 1))


@dataclass(frozen=True)
class PiecewiseLinearModel:
    """A partition plus one coefficient vector per piece."""

    partition: Partition
    thetas: np.ndarray

    def __post_init__(self):
        th = np.atleast_2d(np.asarray(self.thetas, dtype=np.float64))
        if th.shape[0] != self.partition.piece_count:
            raise StructuralError(
                f"{th.shape[0]} coefficient vectors for {self.partition.piece_count} pieces"
            )
        object.__setattr__(self, "thetas", _as_readonly(th))

    @property
    def piece_count(self) -> int:
        return self.partition.piece_count


@dataclass(frozen=True)
class FitReport:
    """Result of one estimator run.

    ``sse`` is the total squared residual against the observed responses.
    ``mse_vs_truth`` is filled only on synthetic runs where the noiseless
    ground-truth values are known. ``warning`` flags degraded fallbacks
    (e.g. postprocessing received too few coarse pieces).
    """

    model: PiecewiseLinearModel
    sse: float
    mse_vs_truth: float | None = None
    wall_time: float = 0.0
    warning: str | None = None


def predict(model: PiecewiseLinearModel, dataset: DataSet) -> np.ndarray:
    """Evaluate the piecewise linear model at every dataset row."""
    if model.partition.n != dataset.n:
        raise StructuralError(
            f"partition covers {model.partition.n} rows, dataset has {dataset.n}"
        )
    if model.thetas.shape[1] != dataset.d:
        raise StructuralError(
            f"coefficients have dimension {model.thetas.shape[1]}, dataset has d={dataset.d}"
        )
    out = np.empty(dataset.n)
    for i, (lo, hi) in enumerate(model.partition.intervals()):
        out[lo:hi] = dataset.x_rows[lo:hi] @ model.thetas[i]
    return out


def mse(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error between two equal-length value vectors."""
    p = np.asarray(predicted, dtype=np.float64).ravel()
    t = np.asarray(truth, dtype=np.float64).ravel()
    if p.shape[0] != t.shape[0]:
        raise StructuralError(f"length mismatch: {p.shape[0]} vs {t.shape[0]}")
    if p.shape[0] == 0:
        raise StructuralError("mse of empty vectors")
    r = t - p
    return float(r @ r) / p.shape[0]


def sse_against_responses(model: PiecewiseLinearModel, dataset: DataSet) -> float:
    """Total squared residual of the model against the observed responses."""
    return dataset.n * mse(predict(model, dataset), dataset.y)
