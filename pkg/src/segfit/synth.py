"""Synthetic ground-truth generators for the benchmark scenarios.

All randomness flows through a counter-based Philox generator keyed by the
scenario seed, so instances are reproducible bit-for-bit across platforms.
Segment lengths split n evenly with the remainder appended to the last
segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DataSet, ParameterError, Partition, PiecewiseLinearModel

KINDS = ("piecewise_constant", "piecewise_linear", "piecewise_polynomial", "misspecified")

# Fixed low-frequency shape of the model-misspecification offset; the phase
# keeps its zeros off the segment boundaries.
_OFFSET_CYCLES = 2.0
_OFFSET_PHASE = 0.5


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic-data recipe.

    ``d`` is the feature dimension, except for ``piecewise_polynomial`` where
    it is the polynomial degree (features become 1, x, ..., x^d).
    ``misspec_budget`` is the mean squared offset added to a piecewise-linear
    truth in the ``misspecified`` kind.
    """

    kind: str
    k: int
    n: int
    d: int = 1
    noise_sigma: float = 1.0
    seed: int = 0
    misspec_budget: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown scenario kind {self.kind!r}")
        if not 1 <= self.k <= self.n:
            raise ParameterError(f"need 1 <= k <= n, got k={self.k}, n={self.n}")
        min_d = 0 if self.kind == "piecewise_polynomial" else 1
        if self.d < min_d:
            raise ParameterError(f"d={self.d} invalid for kind {self.kind!r}")
        if self.kind == "piecewise_constant" and self.d != 1:
            raise ParameterError("piecewise_constant is a d=1 scenario")
        if self.noise_sigma < 0:
            raise ParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.misspec_budget < 0:
            raise ParameterError(f"misspec_budget must be >= 0, got {self.misspec_budget}")


@dataclass(frozen=True)
class SyntheticInstance:
    """Generated dataset plus the noiseless truth it came from."""

    dataset: DataSet
    truth_values: np.ndarray
    truth_model: PiecewiseLinearModel
    opt_k: float


def equal_length_bounds(n: int, k: int) -> np.ndarray:
    """k segments of floor(n/k) points; the remainder goes to the last one."""
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    seg = n // k
    return np.concatenate((np.arange(k) * seg, [n]))


def vandermonde_embed(x_scalars: np.ndarray, degree: int) -> np.ndarray:
    """Rows (1, x, x^2, ..., x^degree) for each scalar x.

    Column 1 carries the original coordinate, so datasets built from this
    embedding use partition_col=1.
    """
    if degree < 0:
        raise ParameterError(f"degree must be >= 0, got {degree}")
    x = np.asarray(x_scalars, dtype=np.float64).ravel()
    return np.vander(x, degree + 1, increasing=True)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _misspec_offsets(n: int, budget: float) -> np.ndarray:
    raw = np.sin(2.0 * np.pi * _OFFSET_CYCLES * np.arange(n) / n + _OFFSET_PHASE)
    if budget == 0.0:
        return np.zeros(n)
    return raw * math.sqrt(budget * n / float(raw @ raw))


def generate(spec: ScenarioSpec) -> SyntheticInstance:
    """Build one synthetic instance.

    piecewise_constant: constant regressor x=(1), segment values drawn as
    uniform integers in {1..10}. piecewise_linear: standard Gaussian feature
    matrix sorted along column 0, per-segment coefficients uniform on
    [-1, 1]^d. piecewise_polynomial: uniform [-1, 1] scalars embedded as
    (1, x, ..., x^degree), coefficients uniform on [-1, 1]. misspecified:
    piecewise_linear plus a smooth offset rescaled so its mean square equals
    misspec_budget. Gaussian noise with the requested sigma is added last.
    """
    rng = _rng(spec.seed)
    n, k = spec.n, spec.k
    bounds = equal_length_bounds(n, k)

    if spec.kind == "piecewise_constant":
        x = np.ones((n, 1))
        thetas = rng.integers(1, 11, size=k).astype(np.float64)[:, None]
        partition_col = 0
    elif spec.kind in ("piecewise_linear", "misspecified"):
        x = rng.standard_normal((n, spec.d))
        x = x[np.argsort(x[:, 0], kind="stable")]
        thetas = rng.uniform(-1.0, 1.0, size=(k, spec.d))
        partition_col = 0
    else:  # piecewise_polynomial
        xs = np.sort(rng.uniform(-1.0, 1.0, size=n))
        x = vandermonde_embed(xs, spec.d)
        thetas = rng.uniform(-1.0, 1.0, size=(k, spec.d + 1))
        partition_col = 1 if spec.d >= 1 else 0

    truth_model = PiecewiseLinearModel(Partition(bounds), thetas)
    base = np.empty(n)
    for i, (lo, hi) in enumerate(truth_model.partition.intervals()):
        base[lo:hi] = x[lo:hi] @ thetas[i]

    if spec.kind == "misspecified":
        offsets = _misspec_offsets(n, spec.misspec_budget)
        truth_values = base + offsets
        opt_k = float(offsets @ offsets) / n
    else:
        truth_values = base
        opt_k = 0.0

    if spec.noise_sigma > 0:
        y = truth_values + spec.noise_sigma * rng.standard_normal(n)
    else:
        y = truth_values.copy()

    dataset = DataSet(x_rows=x, y=y, partition_col=partition_col)
    truth_values = truth_values.copy()
    truth_values.setflags(write=False)
    return SyntheticInstance(
        dataset=dataset,
        truth_values=truth_values,
        truth_model=truth_model,
        opt_k=opt_k,
    )


__all__ = [
    "KINDS",
    "ScenarioSpec",
    "SyntheticInstance",
    "equal_length_bounds",
    "generate",
    "vandermonde_embed",
]
