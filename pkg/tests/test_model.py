import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from segfit import (
    DataSet,
    NonFiniteDataError,
    Partition,
    PiecewiseLinearModel,
    StructuralError,
    mse,
    predict,
    sse_against_responses,
)
from conftest import philox, random_dataset


def model_of(bounds, thetas):
    return PiecewiseLinearModel(Partition(np.array(bounds)), np.array(thetas, dtype=float))


class TestPredict:
    def test_single_constant_piece(self):
        ds = DataSet(x_rows=np.ones((3, 1)), y=np.zeros(3))
        m = model_of([0, 3], [[2.0]])
        assert np.array_equal(predict(m, ds), [2.0, 2.0, 2.0])

    def test_two_piecewise_constant_pieces(self):
        ds = DataSet(x_rows=np.full((4, 1), 3.0), y=np.zeros(4))
        m = model_of([0, 2, 4], [[0.0], [1.0]])
        assert np.array_equal(predict(m, ds), [0.0, 0.0, 3.0, 3.0])

    def test_affine_line_on_vandermonde_rows(self):
        x = np.array([0.0, 1.0, 2.0])
        ds = DataSet(x_rows=np.column_stack((np.ones(3), x)), y=np.zeros(3))
        m = model_of([0, 3], [[1.0, 2.0]])
        assert np.array_equal(predict(m, ds), [1.0, 3.0, 5.0])

    def test_partition_size_mismatch_raises(self):
        ds = DataSet(x_rows=np.ones((3, 1)), y=np.zeros(3))
        m = model_of([0, 4], [[1.0]])
        with pytest.raises(StructuralError):
            predict(m, ds)

    def test_predictions_scale_with_features(self):
        rng = philox(1)
        ds = random_dataset(rng, 20, 3)
        scaled = DataSet(x_rows=ds.x_rows * 2.5, y=ds.y, partition_col=0)
        m = model_of([0, 7, 20], rng.standard_normal((2, 3)))
        assert np.allclose(predict(m, scaled), 2.5 * predict(m, ds), rtol=1e-12)


class TestMse:
    def test_identity_is_zero(self):
        assert mse(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 3.0])) == 0.0

    def test_unit_offset(self):
        assert mse(np.zeros(2), np.ones(2)) == 1.0

    def test_single_deviation(self):
        assert mse(np.zeros(4), np.array([2.0, 0, 0, 0])) == 1.0

    def test_length_mismatch_raises(self):
        with pytest.raises(StructuralError):
            mse(np.zeros(3), np.zeros(4))

    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.randoms())
    @settings(max_examples=50, deadline=None)
    def test_permutation_invariant_and_nonnegative(self, values, pyrand):
        truth = np.array(values)
        pred = truth + 0.5
        perm = list(range(len(values)))
        pyrand.shuffle(perm)
        assert mse(pred, truth) >= 0.0
        assert mse(pred[perm], truth[perm]) == pytest.approx(mse(pred, truth), rel=1e-12)

    def test_zero_iff_equal(self):
        a = np.array([1.0, 2.0])
        assert mse(a, a) == 0.0
        assert mse(a, a + 1e-9) > 0.0


class TestSse:
    def test_perfect_fit_is_zero(self):
        x = np.array([0.0, 1.0, 2.0])
        ds = DataSet(x_rows=np.column_stack((np.ones(3), x)), y=1.0 + 2.0 * x, partition_col=0)
        m = model_of([0, 3], [[1.0, 2.0]])
        assert sse_against_responses(m, ds) == 0.0

    def test_zero_model_against_unit_responses(self):
        ds = DataSet(x_rows=np.ones((2, 1)), y=np.ones(2))
        m = model_of([0, 2], [[0.0]])
        assert sse_against_responses(m, ds) == 2.0

    def test_equals_n_times_mse(self):
        rng = philox(2)
        ds = random_dataset(rng, 30, 2)
        m = model_of([0, 11, 30], rng.standard_normal((2, 2)))
        lhs = sse_against_responses(m, ds)
        rhs = ds.n * mse(predict(m, ds), ds.y)
        assert lhs == rhs
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestDataSetValidation:
    def test_rejects_all_zero_row(self):
        with pytest.raises(StructuralError):
            DataSet(x_rows=np.array([[1.0], [0.0]]), y=np.zeros(2))

    def test_rejects_unsorted_partition_column(self):
        with pytest.raises(StructuralError):
            DataSet(x_rows=np.array([[2.0], [1.0]]), y=np.zeros(2))

    def test_allows_ties_in_partition_column(self):
        ds = DataSet(x_rows=np.array([[1.0, 5.0], [1.0, -2.0]]), y=np.zeros(2))
        assert ds.n == 2

    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteDataError):
            DataSet(x_rows=np.array([[np.nan]]), y=np.zeros(1))
        with pytest.raises(NonFiniteDataError):
            DataSet(x_rows=np.ones((1, 1)), y=np.array([np.inf]))

    def test_rejects_length_mismatch(self):
        with pytest.raises(StructuralError):
            DataSet(x_rows=np.ones((3, 1)), y=np.zeros(2))

    def test_arrays_are_read_only(self):
        ds = DataSet(x_rows=np.ones((2, 1)), y=np.zeros(2))
        with pytest.raises(ValueError):
            ds.y[0] = 1.0


class TestPartition:
    @given(st.integers(1, 200), st.data())
    @settings(max_examples=50, deadline=None)
    def test_intervals_cover_and_are_disjoint(self, n, data):
        cuts = data.draw(
            st.lists(st.integers(1, max(1, n - 1)), max_size=8, unique=True)
        ) if n > 1 else []
        p = Partition(np.array([0] + sorted(cuts) + [n]))
        ivs = p.intervals()
        assert ivs[0][0] == 0 and ivs[-1][1] == n
        for (a, b), (c, d) in zip(ivs[:-1], ivs[1:]):
            assert a < b == c < d
        assert p.piece_count == len(ivs) >= 1

    def test_rejects_empty_piece(self):
        with pytest.raises(StructuralError):
            Partition(np.array([0, 3, 3, 5]))

    def test_rejects_bad_origin(self):
        with pytest.raises(StructuralError):
            Partition(np.array([1, 5]))

    def test_theta_count_must_match(self):
        with pytest.raises(StructuralError):
            PiecewiseLinearModel(Partition(np.array([0, 2, 4])), np.ones((1, 1)))
