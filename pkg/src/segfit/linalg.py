"""Dense least-squares kernels for interval fits.

Every Gram matrix carries a small fixed ridge so inverses always exist; the
ridge magnitude is tied to the dataset's trace scale so it is negligible
against any interval actually containing data. The direct solver runs a few
defect-correction steps toward the unregularized normal equations, which
brings rank-deficient intervals to the accuracy of an exact least-squares
solve without branching on rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import (
    CapacityError,
    DataSet,
    SingularUpdateError,
    StructuralError,
)

DEFAULT_TABLE_CAP = 20_000
_RIDGE_REL = 1e-10


def default_ridge(dataset: DataSet) -> float:
    """Ridge applied to every Gram matrix built from this dataset.

    Scales with the mean diagonal entry of the full-dataset Gram, so it is
    invariant under rescaling the features as a group.
    """
    x = dataset.x_rows
    trace_scale = float(np.einsum("ij,ij->", x, x)) / dataset.d
    return _RIDGE_REL * max(trace_scale, np.finfo(np.float64).tiny)


def _check_interval(dataset: DataSet, interval: tuple[int, int]) -> tuple[int, int]:
    lo, hi = int(interval[0]), int(interval[1])
    if not (0 <= lo < hi <= dataset.n):
        raise StructuralError(f"empty or out-of-range interval [{lo}, {hi}) for n={dataset.n}")
    return lo, hi


def solve_normal_equations(G: np.ndarray, b: np.ndarray, ridge: float) -> np.ndarray:
    """Solve min ||y - X theta||^2 given G = X'X and b = X'y.

    Ridge-stabilized solve followed by defect correction toward G theta = b;
    b lies in the range of G, so the iteration converges to the minimum-norm
    least-squares coefficients even when G is singular.
    """
    d = G.shape[0]
    Gr = G + ridge * np.eye(d)
    theta = np.linalg.solve(Gr, b)
    for _ in range(_kernels.REFINE_STEPS):
        theta = theta + np.linalg.solve(Gr, b - G @ theta)
    return theta


def least_squares(
    dataset: DataSet, interval: tuple[int, int], ridge: float | None = None
) -> tuple[np.ndarray, float]:
    """Least-squares coefficients and squared residual on one index interval."""
    lo, hi = _check_interval(dataset, interval)
    lam = default_ridge(dataset) if ridge is None else ridge
    X = dataset.x_rows[lo:hi]
    yv = dataset.y[lo:hi]
    theta = solve_normal_equations(X.T @ X, X.T @ yv, lam)
    r = yv - X @ theta
    return theta, float(r @ r)


@dataclass(frozen=True)
class GramState:
    """Running inverse Gram of a growing interval plus the fit accumulators.

    ``gram_inv`` is the inverse of (sum of x x' over absorbed points) + ridge*I,
    maintained by rank-one updates; ``xty`` and ``yty`` accumulate X'y and y'y.
    """

    gram_inv: np.ndarray
    xty: np.ndarray
    yty: float
    count: int
    ridge: float


def gram_seed(d: int, ridge: float) -> GramState:
    """Empty-interval state: inverse of ridge*I with zeroed accumulators."""
    if d < 1 or ridge <= 0.0:
        raise StructuralError(f"need d >= 1 and ridge > 0, got d={d}, ridge={ridge}")
    return GramState(np.eye(d) / ridge, np.zeros(d), 0.0, 0, ridge)


def gram_absorb(state: GramState, x: np.ndarray, y: float) -> GramState:
    """Absorb one data point via the rank-one inverse update.

    (M + x x')^-1 = M^-1 - M^-1 x x' M^-1 / (1 + x' M^-1 x), O(d^2) work.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != state.xty.shape[0]:
        raise StructuralError(f"point has dimension {x.shape[0]}, state has {state.xty.shape[0]}")
    u = state.gram_inv @ x
    den = 1.0 + float(x @ u)
    if abs(den) < 1e-12:
        raise SingularUpdateError(f"rank-one update denominator {den:.3e} is numerically zero")
    inv = state.gram_inv - np.outer(u, u) / den
    inv = 0.5 * (inv + inv.T)
    return GramState(inv, state.xty + y * x, state.yty + y * y, state.count + 1, state.ridge)


def gram_error(state: GramState) -> float:
    """Current-interval squared fit error, y'y - (X'y)' gram_inv (X'y).

    Clamps tiny negative round-off to zero.
    """
    if state.count < 1:
        raise StructuralError("gram_error requires at least one absorbed point")
    sse = state.yty - float(state.xty @ (state.gram_inv @ state.xty))
    return max(sse, 0.0)


@dataclass(frozen=True)
class IntervalErrorTable:
    """Triangular store of err(a, b) for all 0 <= a < b <= n, row per start."""

    flat: np.ndarray
    offsets: np.ndarray
    n: int

    def err(self, a: int, b: int) -> float:
        if not (0 <= a < b <= self.n):
            raise StructuralError(f"invalid interval [{a}, {b}) for n={self.n}")
        return float(self.flat[self.offsets[a] + (b - a - 1)])

    def row(self, a: int) -> np.ndarray:
        """Errors err(a, a+1..n) as one contiguous slice."""
        return self.flat[self.offsets[a] : self.offsets[a + 1]]


def build_error_table(
    dataset: DataSet, ridge: float | None = None, cap: int = DEFAULT_TABLE_CAP
) -> IntervalErrorTable:
    """All-intervals least-squares error table via incremental sweeps.

    Each start index sweeps its right endpoint once, updating the Gram
    inverse per point, for O(n^2 d^2) total time and O(n^2) memory. Above
    ``cap`` rows the quadratic table would not fit; the exact DP does not
    need it (it streams the same sweeps) so the cap only guards this
    materialized form.
    """
    if dataset.n > cap:
        raise CapacityError(
            f"error table needs O(n^2) memory and n={dataset.n} exceeds cap={cap}; "
            "use the streaming DP (fit_exact_dp), which never materializes the table"
        )
    lam = default_ridge(dataset) if ridge is None else ridge
    flat, offsets = _kernels.table_kernel(dataset.x_rows, dataset.y, lam)
    return IntervalErrorTable(flat, offsets, dataset.n)
