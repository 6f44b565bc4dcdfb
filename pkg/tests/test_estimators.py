import numpy as np
import pytest

from segfit import (
    DataSet,
    ParameterError,
    Partition,
    PiecewiseLinearModel,
    MergeConfig,
    bucket_greedy_merge,
    build_error_table,
    compute_dp_table,
    fit_exact_dp,
    fit_restricted_dp,
    greedy_merge,
    predict,
    sse_against_responses,
)
from conftest import philox, random_dataset, sorted_dataset
from oracles import brute_force_partition_sse, exhaustive_restricted_sse, ols_fit


def two_piece_instance(rng, n=60, d=2):
    X = rng.standard_normal((n, d))
    X = X[np.argsort(X[:, 0], kind="stable")]
    th1, th2 = rng.standard_normal(d), rng.standard_normal(d)
    y = np.concatenate((X[: n // 2] @ th1, X[n // 2 :] @ th2))
    return DataSet(x_rows=X, y=y)


class TestExactDp:
    def test_recovers_noiseless_two_piece_truth(self):
        ds = two_piece_instance(philox(20))
        rep = fit_exact_dp(ds, 2)
        assert rep.sse <= 1e-18 * float(ds.y @ ds.y)
        assert rep.model.piece_count == 2

    def test_interpolation_with_one_point_per_piece(self):
        ds = random_dataset(philox(21), 9, 1)
        rep = fit_exact_dp(ds, 9)
        assert rep.sse <= 1e-12 * (1.0 + float(ds.y @ ds.y))

    def test_matches_brute_force_enumeration(self):
        rng = philox(22)
        for _ in range(20):
            n = int(rng.integers(4, 15))
            d = int(rng.integers(1, 3))
            k = min(int(rng.integers(1, 4)), n)
            ds = random_dataset(rng, n, d)
            rep = fit_exact_dp(ds, k)
            ref = brute_force_partition_sse(np.asarray(ds.x_rows), np.asarray(ds.y), k)
            assert rep.sse == pytest.approx(ref, rel=1e-8, abs=1e-8)

    def test_rejects_bad_piece_counts(self):
        ds = random_dataset(philox(23), 5, 1)
        with pytest.raises(ParameterError):
            fit_exact_dp(ds, 6)
        with pytest.raises(ParameterError):
            fit_exact_dp(ds, 0)

    def test_sse_monotone_in_k(self):
        ds = random_dataset(philox(24), 40, 2)
        sses = [fit_exact_dp(ds, k).sse for k in range(1, 6)]
        for a, b in zip(sses[:-1], sses[1:]):
            assert b <= a + 1e-9 * (1.0 + a)

    def test_dominates_models_from_other_estimators(self):
        rng = philox(25)
        ds = random_dataset(rng, 120, 2)
        greedy = greedy_merge(ds, MergeConfig(k=2, tau=1.0, gamma=2.0))
        bucket = bucket_greedy_merge(ds, 2)
        for other in (greedy, bucket):
            m = other.model.piece_count
            dp = fit_exact_dp(ds, m)
            scale = 1.0 + sse_against_responses(other.model, ds)
            assert dp.sse <= sse_against_responses(other.model, ds) + 1e-9 * scale

    def test_exactly_k_nonempty_pieces(self):
        ds = random_dataset(philox(26), 30, 1)
        rep = fit_exact_dp(ds, 7)
        widths = np.diff(rep.model.partition.bounds)
        assert len(widths) == 7 and np.all(widths >= 1)


class TestDpTable:
    def test_first_column_equals_prefix_errors(self):
        ds = random_dataset(philox(27), 18, 2)
        table = compute_dp_table(ds, 3)
        errs = build_error_table(ds)
        for i in range(1, 19):
            assert table.a[i, 1] == pytest.approx(errs.err(0, i), rel=1e-10, abs=1e-10)

    def test_values_non_increasing_in_piece_count(self):
        ds = random_dataset(philox(28), 18, 2)
        table = compute_dp_table(ds, 5)
        for i in range(1, 19):
            for j in range(1, min(5, i)):
                slack = 1e-9 * (1.0 + table.a[i, j])
                assert table.a[i, j + 1] <= table.a[i, j] + slack

    def test_ties_choose_longest_final_piece(self):
        # all-equal rows and responses: every placement is a perfect fit
        ds = DataSet(x_rows=np.ones((6, 1)), y=np.full(6, 2.0))
        rep = fit_exact_dp(ds, 2)
        assert list(rep.model.partition.bounds) == [0, 1, 6]


class TestRestrictedDp:
    def test_full_breakpoint_set_reproduces_exact_dp(self):
        ds = random_dataset(philox(29), 25, 2)
        full = fit_restricted_dp(ds, range(1, 25), 3)
        exact = fit_exact_dp(ds, 3)
        assert full.sse == pytest.approx(exact.sse, rel=1e-9, abs=1e-9)

    def test_no_breakpoints_gives_global_fit(self):
        ds = random_dataset(philox(30), 15, 2)
        rep = fit_restricted_dp(ds, [], 1)
        _, ref = ols_fit(np.asarray(ds.x_rows), np.asarray(ds.y))
        assert rep.sse == pytest.approx(ref, rel=1e-9, abs=1e-9)
        assert rep.model.piece_count == 1

    def test_matches_exhaustive_selection_on_coarse_grid(self):
        rng = philox(31)
        ds = random_dataset(rng, 60, 2)
        allowed = sorted(rng.choice(np.arange(1, 60), size=12, replace=False).tolist())
        for pieces in (2, 3):
            rep = fit_restricted_dp(ds, allowed, pieces)
            ref = exhaustive_restricted_sse(
                np.asarray(ds.x_rows), np.asarray(ds.y), allowed, pieces
            )
            assert rep.sse == pytest.approx(ref, rel=1e-8, abs=1e-8)

    def test_restriction_cannot_beat_exact_dp(self):
        ds = random_dataset(philox(32), 40, 1)
        rep = fit_restricted_dp(ds, [10, 20, 30], 3)
        exact = fit_exact_dp(ds, 3)
        assert rep.sse >= exact.sse - 1e-9 * (1.0 + exact.sse)

    def test_unattainable_piece_count_raises(self):
        ds = random_dataset(philox(33), 20, 1)
        with pytest.raises(ParameterError):
            fit_restricted_dp(ds, [5, 10], 4)

    def test_out_of_range_breakpoints_raise(self):
        ds = random_dataset(philox(34), 20, 1)
        with pytest.raises(ParameterError):
            fit_restricted_dp(ds, [0, 5], 2)
