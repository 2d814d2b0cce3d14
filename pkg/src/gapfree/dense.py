"""Dense linear algebra kernels.

Matrices are 2-D ``float64`` numpy arrays. Every public function validates its
inputs (shape, dtype, finiteness) and returns fresh arrays, so callers may
treat results as immutable values.
"""

from dataclasses import dataclass

import numpy as np

from ._rng import RngStream, derive_seed

__all__ = [
    "ContractError",
    "ConvergenceError",
    "SvdFactorization",
    "as_matrix",
    "matmul",
    "transpose",
    "householder_qr",
    "complete_orthonormal",
    "jacobi_svd",
    "spectral_norm",
    "min_singular_value",
    "format_matrix",
    "parse_matrix",
    "read_matrix",
    "write_matrix",
]

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 60


class ContractError(ValueError):
    """Raised when an input violates an operation's preconditions."""


class ConvergenceError(ArithmeticError):
    """Raised when an iterative kernel exhausts its iteration budget."""


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D float64 array (no copy if already one)."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError(f"{name} contains non-finite entries")
    return arr


def matmul(a, b):
    """Matrix product ``a @ b`` with an explicit shape check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ContractError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}")
    return a @ b


def transpose(a):
    return np.ascontiguousarray(as_matrix(a).T)


def _norm(x):
    # 2-norm without intermediate over/underflow
    scale = np.abs(x).max() if x.size else 0.0
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    return scale * np.linalg.norm(x / scale)


def _reflectors(a):
    # In-place Householder triangularisation of a copy of ``a``; returns the
    # unit reflector vectors (None where the column was already zero) and R.
    r = a.copy()
    n, k = r.shape
    vs = []
    for j in range(k):
        x = r[j:, j]
        normx = _norm(x)
        if normx == 0.0:
            vs.append(None)
            continue
        alpha = -np.copysign(normx, x[0])
        v = x.copy()
        v[0] -= alpha
        v /= _norm(v)
        r[j:, j:] -= 2.0 * np.outer(v, v @ r[j:, j:])
        r[j, j] = alpha
        r[j + 1:, j] = 0.0
        vs.append(v)
    return vs, np.triu(r[:k])


def _apply_reflectors(vs, block):
    # block <- H_0 H_1 ... H_{k-1} block
    for j in range(len(vs) - 1, -1, -1):
        v = vs[j]
        if v is not None:
            block[j:, :] -= 2.0 * np.outer(v, v @ block[j:, :])
    return block


def householder_qr(a):
    """Thin Householder QR factorisation.

    Parameters
    ----------
    a : (n, k) array_like
        Input with ``n >= k``.

    Returns
    -------
    q : (n, k) ndarray
        Orthonormal columns.
    r : (k, k) ndarray
        Upper triangular with a non-negative diagonal. Entries below the
        diagonal are exact zeros. Rank deficiency is not an error: it shows
        up as (near) zero diagonal entries, which callers inspect.
    """
    a = as_matrix(a, "a")
    n, k = a.shape
    if n < k:
        raise ContractError(f"householder_qr needs rows >= cols, got {n}x{k}")
    vs, r = _reflectors(a)
    q = _apply_reflectors(vs, np.eye(n, k))
    signs = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    return q * signs, r * signs[:, None]


def complete_orthonormal(u, size=None):
    """Extend the orthonormal columns of ``u`` (n x g) to ``size`` columns.

    The added columns are orthonormal and orthogonal to ``u``. ``size``
    defaults to n, giving a full orthogonal matrix.
    """
    u = as_matrix(u, "u")
    n, g = u.shape
    size = n if size is None else size
    if not g <= size <= n:
        raise ContractError(f"cannot complete {n}x{g} basis to {size} columns")
    if g == 0:
        return np.eye(n, size)
    vs, _ = _reflectors(u)
    extra = np.zeros((n, size - g))
    extra[np.arange(g, size), np.arange(size - g)] = 1.0
    return np.hstack([u, _apply_reflectors(vs, extra)])


def _round_robin(m):
    # Tournament ordering: every pair (p, q) appears once per sweep and each
    # round consists of disjoint pairs, so a round can be rotated at once.
    players = list(range(m + (m % 2)))
    rounds = []
    half = len(players) // 2
    for _ in range(len(players) - 1):
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        keep = (p < m) & (q < m)
        p, q = p[keep], q[keep]
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


@dataclass(frozen=True)
class SvdFactorization:
    """``a = u @ diag(sigma) @ v.T`` with ``sigma`` non-increasing."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def rank(self):
        return len(self.sigma)

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def jacobi_svd(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Thin SVD by one-sided (Hestenes) Jacobi rotations.

    Column pairs are orthogonalised in cyclic round-robin sweeps until every
    pair satisfies ``|a_p . a_q| <= tol * |a_p| |a_q|``.

    Parameters
    ----------
    a : (n, m) array_like
    tol : float
        Relative off-diagonal threshold.
    max_sweeps : int
        Sweep budget; exceeding it raises :class:`ConvergenceError`.

    Returns
    -------
    SvdFactorization
        ``u`` is n x r, ``v`` is m x r, ``sigma`` has length r = min(n, m).
        Left vectors belonging to zero singular values are filled in with an
        orthonormal completion so that ``u.T @ u = I`` always holds.
    """
    a = as_matrix(a, "a")
    n, m = a.shape
    if n < m:
        f = jacobi_svd(a.T, tol=tol, max_sweeps=max_sweeps)
        return SvdFactorization(u=f.v, sigma=f.sigma, v=f.u)

    scale = np.abs(a).max()
    if scale == 0.0:
        return SvdFactorization(u=np.eye(n, m), sigma=np.zeros(m), v=np.eye(m))
    # Rotations act on columns, so work on the transpose for contiguous rows.
    wt = a.T / scale
    vt = np.eye(m)
    # columns shorter than eps * |A|_F are rounding noise: never rotated, and
    # their left vectors come from an orthonormal completion
    dead = np.finfo(np.float64).eps * np.linalg.norm(wt)
    floor = dead * dead
    rounds = _round_robin(m)
    for _ in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            wp, wq = wt[p], wt[q]
            alpha = np.einsum("ij,ij->i", wp, wp)
            beta = np.einsum("ij,ij->i", wq, wq)
            gamma = np.einsum("ij,ij->i", wp, wq)
            active = ((np.abs(gamma) > tol * np.sqrt(alpha * beta))
                      & (alpha > floor) & (beta > floor))
            if not active.any():
                continue
            rotated = True
            p, q = p[active], q[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = (c * t)[:, None]
            c = c[:, None]
            for mat in (wt, vt):
                xp, xq = mat[p], mat[q]
                mat[p] = c * xp - s * xq
                mat[q] = s * xp + c * xq
        if not rotated:
            break
    else:
        raise ConvergenceError(
            f"one-sided Jacobi did not converge in {max_sweeps} sweeps for a {n}x{m} matrix")

    sigma = np.linalg.norm(wt, axis=1)
    order = np.argsort(-sigma, kind="stable")
    sigma, wt, vt = sigma[order], wt[order], vt[order]
    g = int(np.count_nonzero(sigma > max(dead, np.finfo(np.float64).tiny)))
    u = wt[:g].T / sigma[:g]
    if g < m:
        u = complete_orthonormal(u, m)
    return SvdFactorization(u=u, sigma=sigma * scale, v=np.ascontiguousarray(vt.T))


def spectral_norm(a, tol=1e-12, max_iters=20000, seed=0):
    """Largest singular value by power iteration on ``a.T @ a``.

    The start vector is drawn from a stream seeded by the matrix shape and
    ``seed``, so the estimate is reproducible. An iterate that falls into the
    null space is replaced by a fresh random vector.

    Parameters
    ----------
    a : (n, m) array_like
    tol : float
        Stop once the estimate changes by less than ``tol`` relative.
    max_iters : int
        Iteration budget; exceeding it raises :class:`ConvergenceError`.
    seed : int
        Caller seed mixed into the start-vector stream.
    """
    if not tol > 0:
        raise ContractError(f"tol must be positive, got {tol}")
    a = as_matrix(a, "a")
    n, m = a.shape
    if n == 0 or m == 0:
        return 0.0
    scale = np.abs(a).max()
    if scale == 0.0:
        return 0.0
    b = a / scale
    rng = RngStream(derive_seed(n, m, seed), 0)
    x = rng.normals(m)
    x /= np.linalg.norm(x)
    estimate = 0.0
    restarts = 0
    for _ in range(max_iters):
        y = b @ x
        current = np.linalg.norm(y)
        if current == 0.0:
            restarts += 1
            if restarts > 10:
                break
            x = rng.normals(m)
            x /= np.linalg.norm(x)
            continue
        if abs(current - estimate) <= tol * current:
            return float(max(current, estimate) * scale)
        estimate = current
        x = b.T @ y
        x /= np.linalg.norm(x)
    raise ConvergenceError(
        f"power iteration did not reach tol={tol} within {max_iters} iterations")


def min_singular_value(a):
    a = as_matrix(a, "a")
    if a.shape[0] != a.shape[1]:
        raise ContractError(f"min_singular_value needs a square matrix, got {a.shape}")
    return float(jacobi_svd(a).sigma[-1])


# -- text format -----------------------------------------------------------

def format_matrix(a):
    """Render ``a`` as ``rows cols`` followed by one line per row."""
    a = as_matrix(a)
    lines = [f"{a.shape[0]} {a.shape[1]}"]
    lines.extend(" ".join(f"{x:.17g}" for x in row) for row in a)
    return "\n".join(lines) + "\n"


def parse_matrix(text):
    tokens = text.split("\n", 1)
    header = tokens[0].split()
    if len(header) != 2:
        raise ContractError("matrix header must be 'rows cols'")
    rows, cols = int(header[0]), int(header[1])
    if rows < 1 or cols < 1:
        raise ContractError(f"matrix dimensions must be positive, got {rows}x{cols}")
    body = [line.split() for line in (tokens[1] if len(tokens) > 1 else "").splitlines()
            if line.strip()]
    if len(body) != rows or any(len(line) != cols for line in body):
        raise ContractError(f"matrix body does not match declared shape {rows}x{cols}")
    return as_matrix(np.array(body, dtype=np.float64))


def write_matrix(path, a):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_matrix(a))


def read_matrix(path):
    with open(path, encoding="ascii") as fh:
        return parse_matrix(fh.read())
