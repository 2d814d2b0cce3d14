"""Seeded Gaussian sketches and random orthonormal factors."""

from ._rng import RngStream, derive_seed
from .dense import ContractError, householder_qr

__all__ = ["RngStream", "derive_seed", "gaussian_matrix", "random_orthonormal",
           "RankCollapseError"]


class RankCollapseError(ArithmeticError):
    """An iterate or random draw lost numerical rank."""


def gaussian_matrix(rows, cols, rng):
    """``rows x cols`` matrix of i.i.d. N(0, 1) entries, filled row-major from ``rng``."""
    if rows < 1 or cols < 1:
        raise ContractError(f"gaussian_matrix needs positive dims, got {rows}x{cols}")
    return rng.normals(rows * cols).reshape(rows, cols)


def random_orthonormal(n, r, rng):
    """Orthonormal ``n x r`` matrix: the Q factor of a Gaussian draw.

    Because the Gaussian draw is rotation invariant, the span is uniformly
    distributed over r-dimensional subspaces.
    """
    if not 1 <= r <= n:
        raise ContractError(f"random_orthonormal needs 1 <= r <= n, got n={n}, r={r}")
    q, r_factor = householder_qr(gaussian_matrix(n, r, rng))
    if r_factor.diagonal().min() < 1e-300:
        raise RankCollapseError("Gaussian draw is rank deficient; use another stream")
    return q
