"""Step-by-step numerical audit of the gap-free subspace iteration bound.

For a concrete ``A`` and sketch ``G`` the tracer rewrites everything in the
singular basis of ``A`` (``G' = V^T G``, ``y = U^T x``) and evaluates each
inequality of the argument with its left- and right-hand sides:

* the per-coordinate bound ``|y_i| <= (s_{k+1}/s_i)^(2t+1) |G'_2| |G'_1^-1|``
  for ``i <= k``;
* the effective rank ``k'`` separating directions that must be captured from
  those already within ``(1 + eps) s_{k+1}``;
* the tail ``sum_{i > k'} y_i^2 s_i^2 <= (1 + eps)^2 s_{k+1}^2``;
* the iteration count that makes the head contribution at most ``eps``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dense import (ContractError, as_matrix, complete_orthonormal,
                    jacobi_svd, min_singular_value, spectral_norm)
from .iteration import IterationConfig, draw_sketch, simultaneous_iteration

__all__ = [
    "SingularBlockError",
    "TraceError",
    "TraceReport",
    "rotate_sketch",
    "split_blocks",
    "gaussian_block_condition",
    "effective_rank",
    "worst_direction",
    "y1_coefficient_bounds",
    "tail_bound_check",
    "min_t_for_bound",
    "trace",
]

MARGIN_SLACK = 1e-6
BOUND_SLACK = 1e-6
# sigma_(k+1) at or below this fraction of sigma_1 is rounding noise: exact rank k
RANK_ZERO = 1e-14


class SingularBlockError(ArithmeticError):
    """The leading k x k block of the rotated sketch is numerically singular."""


class TraceError(RuntimeError):
    """A labelled failure inside :func:`trace`."""

    def __init__(self, step, cause):
        super().__init__(f"trace step '{step}' failed: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause


def rotate_sketch(a, g):
    """Oracle SVD of ``a`` and the rotated sketch ``V^T g``."""
    a = as_matrix(a, "a")
    g = as_matrix(g, "g")
    if g.shape[0] != a.shape[1]:
        raise ContractError(f"sketch has {g.shape[0]} rows, A has {a.shape[1]} columns")
    svd = jacobi_svd(a)
    return svd, svd.v.T @ g


def split_blocks(g_rot, k):
    """Split into the top ``k`` rows and the remaining rows."""
    g_rot = as_matrix(g_rot, "g_rot")
    if k > g_rot.shape[0]:
        raise ContractError(f"k={k} exceeds the {g_rot.shape[0]} rows of the rotated sketch")
    return g_rot[:k].copy(), g_rot[k:].copy()


def gaussian_block_condition(g1, g2):
    """``|G'_2| / s_min(G'_1)``, i.e. ``|G'_2| |G'_1^-1|`` without inverting.

    Zero when ``g2`` has no rows.
    """
    g1 = as_matrix(g1, "g1")
    smin = min_singular_value(g1)
    if smin < 1e-300:
        raise SingularBlockError(f"s_min(G'_1) = {smin:.3g} is numerically zero")
    g2 = np.asarray(g2, dtype=np.float64)
    if g2.size == 0:
        return 0.0
    return spectral_norm(g2) / smin


def effective_rank(sigma, k, epsilon):
    """Largest ``k' <= k`` with ``sigma[k'-1] >= (1 + eps) sigma[k]``, else None.

    Indices in the docstring are 1-based to match the usual notation:
    ``k'`` counts the directions whose singular value clears the threshold.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if len(sigma) <= k:
        raise ContractError(f"need more than k={k} singular values, got {len(sigma)}")
    threshold = (1.0 + epsilon) * sigma[k]
    above = np.flatnonzero(sigma[:k] >= threshold)
    if above.size == 0:
        return None
    return int(above[-1]) + 1


def _worst_direction(a, z, svd):
    a = as_matrix(a, "a")
    z = as_matrix(z, "z")
    top = jacobi_svd(a - z @ (z.T @ a))
    residual = float(top.sigma[0])
    if residual == 0.0:
        return None, 0.0
    x = top.u[:, 0]
    for _ in range(2):
        x = x - z @ (z.T @ x)
    norm = np.linalg.norm(x)
    if norm < 0.5:
        return None, residual
    x /= norm
    return complete_orthonormal(svd.u).T @ x, residual


def worst_direction(a, z, svd):
    """Coordinates ``y = U^T x`` of the unit ``x`` perpendicular to ``Z`` maximising ``|x^T A|``.

    ``x`` is the top left singular vector of ``(I - Z Z^T) A``, projected off
    ``Z`` once more to remove rounding leakage. ``U`` is completed to a full
    orthogonal basis so that ``|y| = |x|``. Returns None when the residual is
    exactly zero, in which case no maximising direction exists.
    """
    return _worst_direction(a, z, svd)[0]


def _padded_sigma(sigma, length):
    out = np.zeros(length)
    out[:len(sigma)] = sigma
    return out


def y1_coefficient_bounds(y, sigma, k, t, g2_norm, g1_inv_norm):
    """Slack ``(s_{k+1}/s_i)^(2t+1) |G'_2| |G'_1^-1| - |y_i|`` for ``i = 1..k``.

    Entries with ``s_i = 0`` carry no constraint and get ``+inf``.
    """
    y = np.asarray(y, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    head = sigma[:k]
    margins = np.full(k, np.inf)
    live = head > 0.0
    ratio = sigma[k] / head[live]
    bound = ratio ** (2 * t + 1) * g2_norm * g1_inv_norm
    margins[live] = bound - np.abs(y[:k][live])
    return margins


def tail_bound_check(y, sigma, kprime, epsilon, k):
    """Return ``(tail, limit)``.

    ``tail = sum_{i > k'} y_i^2 s_i^2`` and ``limit = (1 + eps)^2 s_{k+1}^2``.
    A missing ``k'`` (flat top of the spectrum) means the sum runs over every
    index. The squared factor is what the term-wise comparison
    ``s_i < (1 + eps) s_{k+1}`` for ``i > k'`` actually yields.
    """
    y = np.asarray(y, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    start = 0 if kprime is None else kprime
    tail = float(np.sum((y[start:] * sigma[start:len(y)]) ** 2))
    limit = (1.0 + epsilon) ** 2 * sigma[k] ** 2
    return tail, limit


def min_t_for_bound(g2_norm, g1_inv_norm, k, epsilon, sigma_kplus1=None):
    """Smallest t with ``C^2 k (1 + eps)^(-4t) <= eps``, ``C = |G'_2| |G'_1^-1|``.

    Passing ``sigma_kplus1`` evaluates the variant whose right-hand side is
    ``eps * s_{k+1}^2`` instead. A non-positive result means any ``t >= 1``
    suffices; ``-inf`` is returned when ``C = 0``.
    """
    product = (g2_norm * g1_inv_norm) ** 2 * k
    rhs = epsilon if sigma_kplus1 is None else epsilon * sigma_kplus1 ** 2
    if product == 0.0:
        return -math.inf
    if rhs == 0.0:
        return math.inf
    return math.log(product / rhs) / (4.0 * math.log1p(epsilon))


@dataclass(frozen=True)
class TraceReport:
    """Every intermediate quantity of one audited trial."""

    sigma: np.ndarray
    k: int
    epsilon: float
    kprime: Optional[int]
    g2_norm: float
    g1_inv_norm: float
    y: Optional[np.ndarray]
    y1_margins: np.ndarray
    tail_sum: float
    tail_limit: float
    tail_limit_unsquared: float
    min_t: float
    min_t_inline: float
    t_used: int
    residual: float
    bound: float
    z: np.ndarray = field(repr=False, default=None)

    @property
    def sigma_kplus1(self):
        return float(self.sigma[self.k])

    @property
    def claim_trivial(self):
        return self.kprime is None

    @property
    def degenerate(self):
        return self.y is None

    @property
    def worst_margin(self):
        return float(np.min(self.y1_margins)) if len(self.y1_margins) else math.inf

    @property
    def margins_ok(self):
        if self.y is None:
            return True
        bounds = self.y1_margins + np.abs(self.y[:self.k])
        return bool(np.all(self.y1_margins >= -MARGIN_SLACK * (1.0 + bounds)))

    @property
    def tail_ok(self):
        return self.tail_sum <= self.tail_limit * (1.0 + 1e-9)

    @property
    def bound_ok(self):
        if self.sigma_kplus1 <= RANK_ZERO * self.sigma[0]:
            return self.residual <= 1e-8 * self.sigma[0]
        return self.residual <= self.bound * (1.0 + BOUND_SLACK)

    @property
    def energy_identity_gap(self):
        """Relative gap between ``residual^2`` and ``sum y_i^2 s_i^2``."""
        if self.y is None:
            return 0.0
        energy = float(np.sum((self.y * self.sigma[:len(self.y)]) ** 2))
        return abs(self.residual ** 2 - energy) / max(self.residual ** 2, 1e-300)

    def render(self):
        """Human-readable account of every inequality with both sides."""
        s = self.sigma
        k = self.k
        lines = [
            f"k = {k}, eps = {self.epsilon}, t = {self.t_used}",
            f"sigma_k = {s[k - 1]:.17g}, sigma_(k+1) = {s[k]:.17g}",
            f"|G'_2| = {self.g2_norm:.17g}, |G'_1^-1| = {self.g1_inv_norm:.17g}",
        ]
        if self.kprime is None:
            lines.append("k' : none (sigma_1 < (1+eps) sigma_(k+1)); claim trivial")
        else:
            lines.append(f"k' = {self.kprime}: sigma_k' = {s[self.kprime - 1]:.17g} "
                         f">= {(1 + self.epsilon) * s[k]:.17g} > sigma_(k'+1) = "
                         f"{s[self.kprime]:.17g}")
        if self.y is None:
            lines.append("worst direction: none (residual is exactly zero)")
        else:
            for i, margin in enumerate(self.y1_margins, start=1):
                lhs = abs(self.y[i - 1])
                lines.append(f"|y_{i}| = {lhs:.6e} <= {lhs + margin:.6e}  "
                             f"(margin {margin:.3e}) {'ok' if margin >= -MARGIN_SLACK else 'FAIL'}")
            lines.append(f"tail = {self.tail_sum:.17g} <= (1+eps)^2 s_(k+1)^2 = "
                         f"{self.tail_limit:.17g} {'ok' if self.tail_ok else 'FAIL'}"
                         f"  [(1+eps) s_(k+1)^2 = {self.tail_limit_unsquared:.17g}]")
            lines.append(f"residual^2 vs sum y_i^2 s_i^2: relative gap "
                         f"{self.energy_identity_gap:.3e}")
        lines.append(f"min t = {self.min_t:.6g} (with s_(k+1)^2 on the right: "
                     f"{self.min_t_inline:.6g}); t used = {self.t_used}")
        lines.append(f"residual = {self.residual:.17g} <= (1+eps) s_(k+1) = "
                     f"{self.bound:.17g} {'ok' if self.bound_ok else 'FAIL'}")
        return "\n".join(lines)


def _step(name, fn, *args):
    try:
        return fn(*args)
    except Exception as exc:  # labelled and re-raised
        raise TraceError(name, exc) from exc


def trace(a, cfg: IterationConfig, svd=None):
    """Audit one run of the iteration on ``a`` with exactly the sketch of ``cfg``.

    Intended for desk-scale matrices: it computes two dense Jacobi SVDs. Pass
    ``svd = jacobi_svd(a)`` to reuse the factorisation across many seeds.
    """
    a = as_matrix(a, "a")
    n, m = a.shape
    cfg.check_shape(n, m)
    if cfg.k >= n:
        raise ContractError(f"trace needs k < n to have a sigma_(k+1); got k={cfg.k}, n={n}")
    k, eps = cfg.k, cfg.epsilon
    g = draw_sketch(m, cfg)
    t = cfg.iterations(n)

    z = _step("simultaneous_iteration", simultaneous_iteration, a, g, t, cfg.reorth_period)
    if svd is None:
        svd, g_rot = _step("rotate_sketch", rotate_sketch, a, g)
    else:
        g_rot = svd.v.T @ g
    sigma = _padded_sigma(svd.sigma, n)
    g1, g2 = _step("split_blocks", split_blocks, g_rot, k)
    g2_norm = _step("g2_norm", spectral_norm, g2) if g2.size else 0.0
    g1_inv_norm = 1.0 / _step("g1_min_singular_value", min_singular_value, g1)
    if not math.isfinite(g1_inv_norm):
        raise TraceError("gaussian_block_condition",
                         SingularBlockError("leading block is singular"))
    kprime = effective_rank(sigma, k, eps)
    y, residual = _step("worst_direction", _worst_direction, a, z, svd)

    if y is None:
        margins = np.full(k, np.inf)
        tail, limit = 0.0, (1.0 + eps) ** 2 * sigma[k] ** 2
    else:
        margins = y1_coefficient_bounds(y, sigma, k, t, g2_norm, g1_inv_norm)
        tail, limit = tail_bound_check(y, sigma, kprime, eps, k)

    return TraceReport(
        sigma=sigma, k=k, epsilon=eps, kprime=kprime,
        g2_norm=g2_norm, g1_inv_norm=g1_inv_norm, y=y, y1_margins=margins,
        tail_sum=tail, tail_limit=limit,
        tail_limit_unsquared=(1.0 + eps) * sigma[k] ** 2,
        min_t=min_t_for_bound(g2_norm, g1_inv_norm, k, eps),
        min_t_inline=min_t_for_bound(g2_norm, g1_inv_norm, k, eps, sigma_kplus1=sigma[k]),
        t_used=t, residual=residual, bound=(1.0 + eps) * sigma[k], z=z,
    )
