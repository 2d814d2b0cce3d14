import numpy as np
import pytest

from gapfree.dense import ContractError
from gapfree.sketch import RngStream, derive_seed, gaussian_matrix, random_orthonormal
from gapfree.tracer import gaussian_block_condition, split_blocks


def test_shape():
    assert gaussian_matrix(7, 3, RngStream(1, 0)).shape == (7, 3)


def test_same_stream_is_bitwise_identical():
    a = gaussian_matrix(13, 5, RngStream(42, 7))
    b = gaussian_matrix(13, 5, RngStream(42, 7))
    assert a.tobytes() == b.tobytes()


def test_row_major_fill_continues_the_stream():
    whole = gaussian_matrix(4, 3, RngStream(5, 0))
    rng = RngStream(5, 0)
    # Box-Muller emits pairs, so draws split at even counts concatenate exactly
    np.testing.assert_array_equal(whole.ravel(), np.concatenate([rng.normals(6),
                                                                 rng.normals(6)]))


def test_distinct_streams_and_seeds_differ():
    base = gaussian_matrix(5, 5, RngStream(1, 0))
    assert not np.array_equal(base, gaussian_matrix(5, 5, RngStream(1, 1)))
    assert not np.array_equal(base, gaussian_matrix(5, 5, RngStream(2, 0)))


def test_moments_at_fixed_seed():
    g = gaussian_matrix(200, 200, RngStream(2024, 0))
    assert abs(g.mean()) <= 4 / np.sqrt(40000)
    assert abs(g.var() - 1.0) <= 0.05


def test_uniforms_in_unit_interval():
    u = RngStream(0, 0).uniforms(100000)
    assert u.min() > 0.0 and u.max() <= 1.0
    assert abs(u.mean() - 0.5) < 0.005


def test_tail_frequency():
    z = RngStream(9, 3).normals(200000)
    # P(|Z| > 2) = 0.0455
    assert abs(np.mean(np.abs(z) > 2.0) - 0.0455) < 0.003


def test_seed_range_is_checked():
    with pytest.raises(ValueError):
        RngStream(-1, 0)
    with pytest.raises(ValueError):
        RngStream(0, 2**64)
    RngStream(2**64 - 1, 2**64 - 1).normals(3)


def test_derive_seed_is_deterministic_and_spreads():
    assert derive_seed(3, 4) == derive_seed(3, 4)
    assert derive_seed(3, 4) != derive_seed(4, 3)


def test_bad_dims():
    with pytest.raises(ContractError):
        gaussian_matrix(0, 3, RngStream())


class TestRandomOrthonormal:
    def test_unit_vector(self):
        q = random_orthonormal(9, 1, RngStream(0, 0))
        assert abs(np.linalg.norm(q) - 1.0) <= 1e-12

    def test_orthonormal(self):
        q = random_orthonormal(50, 10, RngStream(0, 0))
        assert np.abs(q.T @ q - np.eye(10)).max() <= 1e-10

    def test_streams_differ(self):
        assert not np.allclose(random_orthonormal(6, 2, RngStream(0, 0)),
                               random_orthonormal(6, 2, RngStream(0, 1)))

    def test_r_larger_than_n(self):
        with pytest.raises(ContractError):
            random_orthonormal(3, 4, RngStream())


def test_rotation_invariance_of_block_condition():
    """Rotating the sketch by a fixed orthogonal matrix leaves its law unchanged."""
    m, k = 60, 5
    v = random_orthonormal(m, m, RngStream(77, 0))
    plain, rotated = [], []
    for seed in range(200):
        g = gaussian_matrix(m, k, RngStream(seed, 0))
        plain.append(gaussian_block_condition(*split_blocks(g, k)))
        rotated.append(gaussian_block_condition(*split_blocks(v.T @ g, k)))
    a, b = np.median(plain), np.median(rotated)
    assert abs(a - b) / max(a, b) < 0.25
