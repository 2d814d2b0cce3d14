import numpy as np
import pytest

from gapfree.harness import make_spectrum, matrix_stream, parse_spectrum, synthesize_matrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def synthetic(kind, n, m, k, matrix_seed=0):
    """Synthetic matrix plus its prescribed spectrum (padded to min(n, m))."""
    sigma = make_spectrum(parse_spectrum(kind), min(n, m), k)
    return synthesize_matrix(sigma, n, m, matrix_stream(matrix_seed)), sigma
