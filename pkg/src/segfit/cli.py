"""Command-line surface: fit CSV data, generate synthetic sets, run sweeps.

Exit codes: 0 success, 2 unreadable input or unwritable output, 3 invalid
flags or parameters, 4 non-finite numeric data. ``fit`` prints line-oriented
``key=value`` pairs for scripting and writes a JSON model document that
round-trips losslessly.

The thread cap (--threads, or the SEGFIT_THREADS environment variable) is
applied by exporting the BLAS/compiler thread-count variables before the
numeric modules load, so it only takes effect for a fresh process.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

SCHEMA_VERSION = 1

_KIND_ALIASES = {
    "constant": "piecewise_constant",
    "linear": "piecewise_linear",
    "poly": "piecewise_polynomial",
    "misspec": "misspecified",
}

EXIT_IO = 2
EXIT_FLAGS = 3
EXIT_NONFINITE = 4


def _apply_thread_cap(threads: int | None) -> None:
    if threads is None:
        env = os.environ.get("SEGFIT_THREADS")
        if env is None:
            return
        try:
            threads = int(env)
        except ValueError:
            raise _CliError(EXIT_FLAGS, f"SEGFIT_THREADS={env!r} is not an integer")
    if threads < 1:
        raise _CliError(EXIT_FLAGS, f"--threads must be >= 1, got {threads}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMBA_NUM_THREADS"):
        os.environ[var] = str(threads)


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_numeric_csv(path: str, has_header: bool):
    import numpy as np

    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot read {path}: {exc}")
    if has_header and rows:
        rows = rows[1:]
    rows = [r for r in rows if r]
    if not rows:
        raise _CliError(EXIT_IO, f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise _CliError(EXIT_IO, f"{path}: non-numeric cell ({exc})")
    if not np.all(np.isfinite(data)):
        raise _CliError(EXIT_NONFINITE, f"{path}: contains NaN or infinite values")
    return data


def _write_csv(path: str, array) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in array:
                w.writerow([repr(float(v)) for v in row])
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot write {path}: {exc}")


def model_to_document(model, dataset, algorithm: str, config: dict,
                      piece_sse, total_sse: float, row_order) -> dict:
    bounds = [int(b) for b in model.partition.bounds]
    pc = dataset.partition_col
    cut_values = [float(dataset.x_rows[b, pc]) for b in bounds[1:-1]]
    return {
        "schema_version": SCHEMA_VERSION,
        "algorithm": algorithm,
        "config": config,
        "n": dataset.n,
        "d": dataset.d,
        "partition_col": pc,
        "row_order": [int(i) for i in row_order],
        "bounds": bounds,
        "cut_values": cut_values,
        "pieces": [
            {"theta": [float(t) for t in model.thetas[i]], "sse": float(piece_sse[i])}
            for i in range(model.piece_count)
        ],
        "total_sse": float(total_sse),
    }


def document_to_model(doc: dict):
    import numpy as np

    from .model import Partition, PiecewiseLinearModel

    thetas = np.array([p["theta"] for p in doc["pieces"]], dtype=np.float64)
    return PiecewiseLinearModel(Partition(np.array(doc["bounds"])), thetas)


def _build_dataset(args):
    import numpy as np

    from .model import DataSet

    data = _read_numeric_csv(args.input_csv, args.has_header)
    y_col = args.y_col if args.y_col >= 0 else data.shape[1] + args.y_col
    if not 0 <= y_col < data.shape[1]:
        raise _CliError(EXIT_FLAGS, f"--y-col {args.y_col} outside the {data.shape[1]} columns")
    y = data[:, y_col]
    if args.time_index:
        n = data.shape[0]
        x = np.column_stack((np.ones(n), np.arange(n, dtype=np.float64)))
        partition_col = 1
    else:
        x = np.delete(data, y_col, axis=1)
        if x.shape[1] == 0:
            raise _CliError(EXIT_FLAGS, "no feature columns left; use --time-index for a bare series")
        partition_col = args.partition_col
        if not 0 <= partition_col < x.shape[1]:
            raise _CliError(EXIT_FLAGS, f"--partition-col {partition_col} outside [0, {x.shape[1]})")
    order = np.argsort(x[:, partition_col], kind="stable")
    from .model import NonFiniteDataError, StructuralError

    try:
        dataset = DataSet(x_rows=x[order], y=y[order], partition_col=partition_col)
    except NonFiniteDataError as exc:
        raise _CliError(EXIT_NONFINITE, str(exc))
    except StructuralError as exc:
        raise _CliError(EXIT_FLAGS, str(exc))
    return dataset, order


def cmd_fit(args) -> int:
    import time

    from .estimators import fit_exact_dp, refit_partition
    from .merging import (
        MergeConfig,
        bucket_greedy_merge,
        estimate_noise_var,
        greedy_merge,
        postprocess,
    )
    from .model import ParameterError, StructuralError

    dataset, order = _build_dataset(args)
    config = {
        "algo": args.algo,
        "k": args.k,
        "tau": args.tau,
        "gamma": args.gamma,
        "noise_var": args.noise_var,
        "partition_col": dataset.partition_col,
        "time_index": args.time_index,
    }
    t0 = time.perf_counter()
    try:
        if args.algo == "dp":
            report = fit_exact_dp(dataset, args.k)
        elif args.algo == "greedy":
            noise_var = args.noise_var
            if noise_var is None:
                if not args.estimate_noise:
                    raise _CliError(
                        EXIT_FLAGS, "--algo greedy needs --noise-var or --estimate-noise"
                    )
                noise_var = estimate_noise_var(dataset.y)
            config["noise_var"] = noise_var
            report = greedy_merge(
                dataset, MergeConfig(k=args.k, tau=args.tau, gamma=args.gamma,
                                     noise_var=noise_var)
            )
        elif args.algo == "bucket":
            report = bucket_greedy_merge(dataset, args.k, gamma=args.gamma)
        else:  # bucket-post
            coarse = bucket_greedy_merge(dataset, args.k, gamma=args.gamma)
            report = postprocess(dataset, coarse.model.partition, args.k)
    except (ParameterError, StructuralError) as exc:
        raise _CliError(EXIT_FLAGS, str(exc))
    wall = time.perf_counter() - t0

    _, total_sse, piece_sse = refit_partition(dataset, report.model.partition)
    doc = model_to_document(report.model, dataset, args.algo, config,
                            piece_sse, total_sse, order)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                json.dump(doc, fh, indent=1)
                fh.write("\n")
        except OSError as exc:
            raise _CliError(EXIT_IO, f"cannot write {args.out}: {exc}")
    if report.warning:
        print(f"warning={report.warning}", file=sys.stderr)
    print(f"n={dataset.n}")
    print(f"d={dataset.d}")
    print(f"pieces={report.model.piece_count}")
    print(f"sse={report.sse!r}")
    print(f"wall_time={wall!r}")
    return 0


def cmd_synth(args) -> int:
    import numpy as np

    from .model import ParameterError
    from .synth import ScenarioSpec, generate

    kind = _KIND_ALIASES[args.kind]
    d = args.degree if kind == "piecewise_polynomial" else args.d
    try:
        spec = ScenarioSpec(
            kind=kind, k=args.k, n=args.n, d=d, noise_sigma=args.sigma,
            seed=args.seed, misspec_budget=args.opt_budget,
        )
        inst = generate(spec)
    except ParameterError as exc:
        raise _CliError(EXIT_FLAGS, str(exc))
    data = np.column_stack((inst.dataset.x_rows, inst.dataset.y))
    _write_csv(args.out, data)
    if args.truth:
        _write_csv(args.truth, inst.truth_values[:, None])
    print(f"n={spec.n}")
    print(f"d={inst.dataset.d}")
    print(f"columns={data.shape[1]}")
    print(f"opt_k={inst.opt_k!r}")
    return 0


def cmd_bench(args) -> int:
    from .bench import ALGORITHMS, run_sweep, write_plot_data
    from .model import ParameterError
    from .synth import ScenarioSpec

    out_dir = args.out_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise _CliError(EXIT_IO, f"out-dir not writable: {exc}")

    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown:
        raise _CliError(EXIT_FLAGS, f"unknown algorithms {unknown}; known: {sorted(ALGORITHMS)}")
    n_values = [int(v) for v in args.n.split(",")]
    kind = _KIND_ALIASES[args.kind]
    d = args.degree if kind == "piecewise_polynomial" else args.d
    try:
        template = ScenarioSpec(
            kind=kind, k=args.k, n=max(n_values), d=d, noise_sigma=args.sigma,
            seed=args.seed, misspec_budget=args.opt_budget,
        )
        records = run_sweep(template, n_values, algos, trials=args.trials,
                            dp_n_cap=args.dp_cap)
    except ParameterError as exc:
        raise _CliError(EXIT_FLAGS, str(exc))
    paths = write_plot_data(records, out_dir)
    print(f"{'algorithm':<12} {'n':>8} {'mse_mean':>12} {'mse_ratio':>10} "
          f"{'time_mean':>10} {'time_ratio':>10}")
    for r in records:
        ratio = "-" if r.mse_ratio is None else f"{r.mse_ratio:.3f}"
        tratio = "-" if r.time_ratio is None else f"{r.time_ratio:.1f}"
        status = " (skipped)" if r.skipped else ""
        print(f"{r.algorithm:<12} {r.n:>8} {r.mse_mean:>12.6g} {ratio:>10} "
              f"{r.time_mean:>10.4g} {tratio:>10}{status}")
    for p in paths:
        print(f"wrote={p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segfit", description="Segmented linear regression toolkit"
    )
    parser.add_argument("--threads", type=int, default=None,
                        help="cap numeric worker threads (default: SEGFIT_THREADS or all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a piecewise linear model to a numeric CSV")
    p_fit.add_argument("input_csv")
    p_fit.add_argument("--algo", choices=("dp", "greedy", "bucket", "bucket-post"),
                       required=True)
    p_fit.add_argument("--k", type=int, required=True, help="target piece count")
    p_fit.add_argument("--tau", type=float, default=1.0)
    p_fit.add_argument("--gamma", type=float, default=2.0)
    p_fit.add_argument("--noise-var", type=float, default=None,
                       help="noise second moment for --algo greedy")
    p_fit.add_argument("--estimate-noise", action="store_true",
                       help="estimate the noise variance from first differences")
    p_fit.add_argument("--partition-col", type=int, default=0,
                       help="feature column defining the pieces (after removing the y column)")
    p_fit.add_argument("--y-col", type=int, default=-1,
                       help="response column index in the CSV (default: last)")
    p_fit.add_argument("--has-header", action="store_true")
    p_fit.add_argument("--time-index", action="store_true",
                       help="ignore feature columns; use rows (1, t) from the row number")
    p_fit.add_argument("--out", default=None, help="write the model document JSON here")
    p_fit.set_defaults(func=cmd_fit)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p_synth.add_argument("--kind", choices=sorted(_KIND_ALIASES), required=True)
    p_synth.add_argument("--k", type=int, required=True)
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--d", type=int, default=1)
    p_synth.add_argument("--degree", type=int, default=1, help="polynomial degree for --kind poly")
    p_synth.add_argument("--sigma", type=float, default=1.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--opt-budget", type=float, default=0.0,
                         help="mean squared misspecification offset for --kind misspec")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--truth", default=None, help="also write the noiseless truth CSV")
    p_synth.set_defaults(func=cmd_synth)

    p_bench = sub.add_parser("bench", help="run an accuracy/runtime sweep")
    p_bench.add_argument("--kind", choices=sorted(_KIND_ALIASES), default="constant")
    p_bench.add_argument("--k", type=int, default=10)
    p_bench.add_argument("--d", type=int, default=1)
    p_bench.add_argument("--degree", type=int, default=1)
    p_bench.add_argument("--sigma", type=float, default=1.0)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--trials", type=int, default=20)
    p_bench.add_argument("--n", required=True, help="comma-separated sample sizes")
    p_bench.add_argument("--algos", default="dp,greedy-2k",
                         help="comma-separated algorithm labels")
    p_bench.add_argument("--dp-cap", type=int, default=10_000,
                         help="skip the exact DP above this n")
    p_bench.add_argument("--opt-budget", type=float, default=0.0)
    p_bench.add_argument("--out-dir", required=True)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_thread_cap(args.threads)
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
