import numpy as np
import pytest

from pclab.spaces import (
    grid_threshold_space,
    sparse_component_space,
    triplet_tree_space,
    two_point_threshold_space,
)


@pytest.fixture
def grid5():
    """GridThreshold(M=4) over one explicit 2-point query, target v=0."""
    return grid_threshold_space(M=4, c=2, queries=[(0.5, 1.0)])


@pytest.fixture
def grid_pool():
    """A small seeded grid space with a query pool, used by run-level tests."""
    return grid_threshold_space(M=20, c=3, pool=40, seed=7)


@pytest.fixture
def sparse22():
    return sparse_component_space(ell=2, c=2, eps=0.25)


@pytest.fixture
def triplet44():
    return triplet_tree_space(n=4, m=4)


@pytest.fixture
def twopoint():
    return two_point_threshold_space(c=4, eps=0.05)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
