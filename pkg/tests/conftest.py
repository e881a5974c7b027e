from collections import Counter

import numpy as np
import pytest
from scipy import stats

from engine.graph_core import build_grid
from utilities.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def grid_2x2():
    return build_grid(2, 2)


@pytest.fixture
def forest_chi_square():
    """p-value of sampled forests against an exact [(forest, probability), ...] table."""

    def _test(forests, exact):
        counts = Counter(forest.key() for forest in forests)
        keys = [forest.key() for forest, _ in exact]
        assert set(counts) <= set(keys), "sampled a forest outside the exact support"
        observed = np.array([counts[key] for key in keys], dtype=float)
        expected = np.array([p for _, p in exact]) * len(forests)
        return stats.chisquare(observed, expected).pvalue

    return _test
