"""Benchmark harness: MSE and wall time across n for every estimator.

Each (n, trial) pair generates one instance from ``seed_base + trial`` and
every algorithm fits that same instance, so the accuracy ratio against the
exact DP compares like with like. Fits are timed with a monotonic clock
around the fit call only; instance generation never counts. Results are
written as whitespace-delimited plot-data files, one per algorithm setting.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .estimators import fit_exact_dp
from .merging import MergeConfig, bucket_greedy_merge, greedy_merge, postprocess
from .model import (
    DataSet,
    FitReport,
    ParameterError,
    Partition,
    PiecewiseLinearModel,
    mse,
    predict,
)
from .synth import ScenarioSpec, generate

DEFAULT_DP_N_CAP = 10_000
DP_LABEL = "dp"

PLOT_HEADER = "n mse_mean mse_ratio time_mean time_ratio trials"


@dataclass(frozen=True)
class BenchRecord:
    """One sweep cell: an algorithm at one sample size, averaged over trials."""

    n: int
    algorithm: str
    pieces_setting: str
    mse_mean: float
    mse_median: float
    mse_ratio: float | None
    time_mean: float
    time_median: float
    time_ratio: float | None
    trials: int
    skipped: bool = False


def _greedy_setting(multiple: int) -> Callable[[DataSet, int, float], FitReport]:
    # Stop threshold of exactly multiple*k pieces: tau=1 keeps 2k candidates
    # per iteration and gamma = (multiple - 4) k places the threshold.
    def fit(dataset: DataSet, k: int, noise_sigma: float) -> FitReport:
        config = MergeConfig(
            k=k, tau=1.0, gamma=float((multiple - 4) * k), noise_var=noise_sigma**2
        )
        return greedy_merge(dataset, config)

    return fit


def _fit_dp(dataset: DataSet, k: int, noise_sigma: float) -> FitReport:
    return fit_exact_dp(dataset, k)


def _fit_bucket(dataset: DataSet, k: int, noise_sigma: float) -> FitReport:
    return bucket_greedy_merge(dataset, k)


def _fit_bucket_post(dataset: DataSet, k: int, noise_sigma: float) -> FitReport:
    coarse = bucket_greedy_merge(dataset, k)
    return postprocess(dataset, coarse.model.partition, k)


def _fit_noop(dataset: DataSet, k: int, noise_sigma: float) -> FitReport:
    # Instant baseline used to verify that timing excludes everything but
    # the fit call itself.
    model = PiecewiseLinearModel(
        Partition(np.array([0, dataset.n])), np.zeros((1, dataset.d))
    )
    return FitReport(model=model, sse=float(dataset.y @ dataset.y))


ALGORITHMS: dict[str, tuple[Callable[[DataSet, int, float], FitReport], str]] = {
    DP_LABEL: (_fit_dp, "k"),
    "greedy-k": (_greedy_setting(1), "k"),
    "greedy-2k": (_greedy_setting(2), "2k"),
    "greedy-4k": (_greedy_setting(4), "4k"),
    "bucket": (_fit_bucket, "k log n"),
    "bucket-post": (_fit_bucket_post, "2k+1"),
    "noop": (_fit_noop, "1"),
}


def _warm_up(algorithms: Sequence[str], template: ScenarioSpec) -> None:
    """Run each algorithm once on a tiny instance so compilation and module
    setup never land inside a timed fit."""
    tiny = replace(template, n=max(16, 2 * template.k), k=min(template.k, 2), seed=0)
    inst = generate(tiny)
    for label in algorithms:
        ALGORITHMS[label][0](inst.dataset, tiny.k, tiny.noise_sigma)


def run_sweep(
    template: ScenarioSpec,
    n_values: Sequence[int],
    algorithms: Sequence[str],
    trials: int = 20,
    dp_n_cap: int = DEFAULT_DP_N_CAP,
    clock: Callable[[], float] = time.perf_counter,
) -> list[BenchRecord]:
    """Fit every algorithm at every sample size and aggregate over trials.

    The exact DP is skipped (flagged record) above ``dp_n_cap``; ratio
    columns are present only where the DP baseline ran at the same n.
    """
    if trials < 1:
        raise ParameterError(f"trials must be >= 1, got {trials}")
    if list(n_values) != sorted(set(int(v) for v in n_values)):
        raise ParameterError("n_values must be ascending and unique")
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ParameterError(f"unknown algorithms: {unknown}")

    _warm_up(algorithms, template)
    records: list[BenchRecord] = []
    for n in n_values:
        per_algo_mse: dict[str, list[float]] = {a: [] for a in algorithms}
        per_algo_time: dict[str, list[float]] = {a: [] for a in algorithms}
        ran: dict[str, bool] = {
            a: not (a == DP_LABEL and n > dp_n_cap) for a in algorithms
        }
        for trial in range(trials):
            inst = generate(replace(template, n=int(n), seed=template.seed + trial))
            for label in algorithms:
                if not ran[label]:
                    continue
                fit = ALGORITHMS[label][0]
                t0 = clock()
                report = fit(inst.dataset, template.k, template.noise_sigma)
                elapsed = clock() - t0
                per_algo_time[label].append(elapsed)
                per_algo_mse[label].append(
                    mse(predict(report.model, inst.dataset), inst.truth_values)
                )
        dp_mse = np.mean(per_algo_mse[DP_LABEL]) if ran.get(DP_LABEL) else None
        dp_time = np.mean(per_algo_time[DP_LABEL]) if ran.get(DP_LABEL) else None
        for label in algorithms:
            setting = ALGORITHMS[label][1]
            if not ran[label]:
                records.append(
                    BenchRecord(
                        n=int(n), algorithm=label, pieces_setting=setting,
                        mse_mean=math.nan, mse_median=math.nan, mse_ratio=None,
                        time_mean=math.nan, time_median=math.nan, time_ratio=None,
                        trials=0, skipped=True,
                    )
                )
                continue
            m_mean = float(np.mean(per_algo_mse[label]))
            t_mean = float(np.mean(per_algo_time[label]))
            records.append(
                BenchRecord(
                    n=int(n),
                    algorithm=label,
                    pieces_setting=setting,
                    mse_mean=m_mean,
                    mse_median=float(np.median(per_algo_mse[label])),
                    mse_ratio=None if dp_mse is None else m_mean / float(dp_mse),
                    time_mean=t_mean,
                    time_median=float(np.median(per_algo_time[label])),
                    time_ratio=None if dp_time is None else float(dp_time) / t_mean,
                    trials=trials,
                )
            )
    return records


def fit_runtime_slope(records: Sequence[BenchRecord]) -> float:
    """Least-squares slope of log(time_mean) against log(n).

    Needs at least three sample sizes spanning a factor of eight for the
    slope to mean anything.
    """
    pts = [(r.n, r.time_mean) for r in records if not r.skipped]
    ns = sorted(set(p[0] for p in pts))
    if len(ns) < 3 or max(ns) < 8 * min(ns):
        raise ParameterError(
            "runtime slope needs >= 3 sample sizes spanning at least a factor of 8"
        )
    logn = np.log([p[0] for p in pts])
    logt = np.log([p[1] for p in pts])
    return float(np.polyfit(logn, logt, 1)[0])


def _fmt(v: float | None) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return repr(float(v))


def write_plot_data(records: Sequence[BenchRecord], out_dir: str | Path) -> list[Path]:
    """One whitespace-delimited file per algorithm, rows ordered by n."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for label in dict.fromkeys(r.algorithm for r in records):
        rows = [r for r in records if r.algorithm == label]
        path = out / f"{label.replace('-', '_')}.txt"
        lines = [PLOT_HEADER]
        for r in sorted(rows, key=lambda r: r.n):
            lines.append(
                f"{r.n} {_fmt(r.mse_mean)} {_fmt(r.mse_ratio)} "
                f"{_fmt(r.time_mean)} {_fmt(r.time_ratio)} {r.trials}"
            )
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths
