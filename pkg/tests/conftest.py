import numpy as np
import pytest

from segfit import DataSet


def philox(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sorted_dataset(X: np.ndarray, y: np.ndarray, partition_col: int = 0) -> DataSet:
    """Build a DataSet from unsorted rows by sorting along the partition column."""
    order = np.argsort(np.atleast_2d(X)[:, partition_col], kind="stable")
    return DataSet(x_rows=np.atleast_2d(X)[order], y=np.asarray(y)[order],
                   partition_col=partition_col)


def random_dataset(rng: np.random.Generator, n: int, d: int) -> DataSet:
    return sorted_dataset(rng.standard_normal((n, d)), rng.standard_normal(n))


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    """Compile the numba kernels once so no individual test pays for it."""
    from segfit import build_error_table, fit_exact_dp

    ds = random_dataset(philox(0), 12, 2)
    fit_exact_dp(ds, 2)
    build_error_table(ds)
