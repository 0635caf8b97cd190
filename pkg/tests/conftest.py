import numpy as np
import pytest

from qwcat.registry import resolve


@pytest.fixture(scope="session")
def walks():
    cache = {}

    def get(ref):
        if ref not in cache:
            cache[ref] = resolve(ref)
        return cache[ref]

    return get


def assert_multiset_close(a, b, tol):
    """Two complex multisets agree up to an optimal pairing."""
    from scipy.optimize import linear_sum_assignment

    a, b = np.ravel(a), np.ravel(b)
    assert len(a) == len(b)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    assert cost[r, c].max() <= tol, cost[r, c].max()
