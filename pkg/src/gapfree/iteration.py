"""Randomized simultaneous iteration for the top-k left singular subspace.

The basis ``Z`` spans ``(A A^T)^t A G`` for a Gaussian ``m x k`` sketch ``G``.
The iteration count only depends on ``n``, ``epsilon`` and a constant ``c``;
no spectral gap enters anywhere.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .dense import ContractError, as_matrix, jacobi_svd, spectral_norm
from .sketch import RankCollapseError, RngStream, gaussian_matrix, householder_qr

__all__ = [
    "IterationConfig",
    "ApproximationResult",
    "choose_t",
    "draw_sketch",
    "simultaneous_iteration",
    "low_rank_residual",
    "approximate_topk",
]

COLLAPSE_THRESHOLD = 1e-300


@dataclass(frozen=True)
class IterationConfig:
    """Parameters of one run of :func:`approximate_topk`.

    ``t_override`` replaces the schedule ``choose_t(n, epsilon, c)`` when set.
    ``reorth_period`` is the number of ``A A^T`` applications between QR
    re-orthonormalisations.
    """

    k: int
    epsilon: float = 0.25
    c: float = 1.0
    t_override: Optional[int] = None
    reorth_period: int = 1
    seed: int = 0
    stream_index: int = 0
    exact_residual: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ContractError(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.epsilon <= 1.0:
            raise ContractError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not self.c > 0.0:
            raise ContractError(f"c must be positive, got {self.c}")
        if self.reorth_period < 1:
            raise ContractError(f"reorth_period must be >= 1, got {self.reorth_period}")
        if self.t_override is not None and self.t_override < 1:
            raise ContractError(f"t_override must be >= 1, got {self.t_override}")

    def check_shape(self, n, m):
        if self.k > min(n, m):
            raise ContractError(f"k={self.k} exceeds min(n, m) for a {n}x{m} matrix")

    def iterations(self, n):
        if self.t_override is not None:
            return self.t_override
        return choose_t(n, self.epsilon, self.c)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class ApproximationResult:
    z: np.ndarray
    t_used: int
    residual: float
    sigma_kplus1: Optional[float] = None


def choose_t(n, epsilon, c):
    """Iteration count ``max(1, ceil(c * ln(n / epsilon) / epsilon))``.

    >>> choose_t(1000, 0.1, 1.0)
    93
    >>> choose_t(200, 0.25, 1.0)
    27
    """
    if n < 1 or not 0.0 < epsilon <= 1.0 or not c > 0.0:
        raise ContractError(f"invalid schedule inputs n={n}, epsilon={epsilon}, c={c}")
    return max(1, math.ceil(c * math.log(n / epsilon) / epsilon))


def draw_sketch(m, cfg):
    """The ``m x k`` Gaussian sketch used for ``cfg``; same every call."""
    return gaussian_matrix(m, cfg.k, RngStream(cfg.seed, cfg.stream_index))


def _orthonormalize(w):
    q, r = householder_qr(w)
    if np.abs(r.diagonal()).min() < COLLAPSE_THRESHOLD:
        raise RankCollapseError(
            "iterate lost rank (R diagonal below 1e-300); retry with a different seed")
    return q


def simultaneous_iteration(a, g, t, reorth_period=1):
    """Orthonormal basis of ``span((A A^T)^t A G)``.

    Parameters
    ----------
    a : (n, m) array_like
    g : (m, k) array_like
        Start block, ``k <= min(n, m)``.
    t : int
        Number of ``A A^T`` applications, at least 1.
    reorth_period : int
        Re-orthonormalise the block every this many applications (and once
        at the end). ``reorth_period >= t`` evaluates the raw power, which
        overflows or loses rank for large ``t``.

    Returns
    -------
    (n, k) ndarray with orthonormal columns.

    Raises
    ------
    RankCollapseError
        An intermediate QR had a diagonal entry below 1e-300, or the raw
        power overflowed.
    """
    a = as_matrix(a, "a")
    g = as_matrix(g, "g")
    n, m = a.shape
    if g.shape[0] != m:
        raise ContractError(f"sketch has {g.shape[0]} rows but A is {n}x{m}")
    k = g.shape[1]
    if k > min(n, m):
        raise ContractError(f"block width {k} exceeds min(n, m) = {min(n, m)}")
    if t < 1 or reorth_period < 1:
        raise ContractError(f"t and reorth_period must be >= 1, got {t}, {reorth_period}")

    at = a.T
    with np.errstate(over="ignore", invalid="ignore"):
        w = a @ g
        for step in range(1, t + 1):
            w = a @ (at @ w)
            if not np.all(np.isfinite(w)):
                raise RankCollapseError(
                    f"iterate overflowed after {step} steps; lower reorth_period")
            if step % reorth_period == 0 and step < t:
                w = _orthonormalize(w)
    return _orthonormalize(w)


def low_rank_residual(a, z, exact=False, seed=0):
    """Spectral norm of ``A - Z Z^T A``.

    ``exact=True`` uses the Jacobi SVD instead of power iteration; only
    sensible for small matrices.
    """
    a = as_matrix(a, "a")
    z = np.asarray(z, dtype=np.float64).reshape(a.shape[0], -1)
    if z.shape[1]:
        resid = a - z @ (z.T @ a)
    else:
        resid = a
    if exact:
        return float(jacobi_svd(resid).sigma[0])
    return spectral_norm(resid, seed=seed)


def approximate_topk(a, cfg):
    """Run the randomized iteration for ``cfg`` and measure its residual.

    The result is a deterministic function of ``(a, cfg)``.
    """
    a = as_matrix(a, "a")
    n, m = a.shape
    cfg.check_shape(n, m)
    t = cfg.iterations(n)
    z = simultaneous_iteration(a, draw_sketch(m, cfg), t, cfg.reorth_period)
    residual = low_rank_residual(a, z, exact=cfg.exact_residual, seed=cfg.seed)
    return ApproximationResult(z=z, t_used=t, residual=residual)
