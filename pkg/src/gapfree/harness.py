"""Synthetic spectra, single trials, parameter sweeps and their CSV output."""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dense import ContractError, as_matrix, jacobi_svd
from .iteration import IterationConfig, approximate_topk, choose_t, draw_sketch
from .sketch import RngStream, derive_seed, random_orthonormal
from .tracer import RANK_ZERO, gaussian_block_condition, split_blocks, trace

__all__ = [
    "SPECTRUM_KINDS",
    "CSV_HEADER",
    "SUMMARY_HEADER",
    "SpectrumSpec",
    "ExperimentRecord",
    "CellSummary",
    "SweepResult",
    "parse_spectrum",
    "make_spectrum",
    "synthesize_matrix",
    "matrix_stream",
    "build_matrix",
    "run_trial",
    "trial_on_matrix",
    "sweep",
    "format_records",
    "format_summary",
    "roundtrip_ok",
]

SPECTRUM_KINDS = ("flat", "step", "geometric", "zero-gap-at-k", "custom")

CSV_HEADER = ("n,m,k,epsilon,c,t,seed,stream,spectrum,sigma_kp1,residual,ratio,bound_ok,"
              "kprime,g2_norm,g1_inv_norm,min_t,worst_margin,tail,tail_limit,status").split(",")

SUMMARY_HEADER = ("spectrum,epsilon,t_multiplier,t,trials,failures,failure_fraction,"
                  "median_ratio,median_block_condition,oracle_roundtrip_ok").split(",")

_DEFAULTS = {
    "flat": {"value": 1.0},
    "geometric": {"start": 1.0, "ratio": 0.9},
    "step": {"head": 1.0, "ratio": 0.1},
    "zero-gap-at-k": {"head": 2.0, "knee": 1.0, "tail_ratio": 0.1},
    "custom": {},
}
BOUND_SLACK = 1e-6
RANK_K_TOL = 1e-8
ROUNDTRIP_RTOL = 1e-9
ROUNDTRIP_ATOL = 1e-12


@dataclass(frozen=True)
class SpectrumSpec:
    """A family of prescribed singular values.

    ``params`` holds the kind-specific numbers:

    ``flat``           ``value``
    ``geometric``      ``start``, ``ratio``: ``start * ratio**i``
    ``step``           ``head``, ``ratio``, ``position``: ``head`` for the first
                       ``position`` values, ``head * ratio`` after
    ``zero-gap-at-k``  ``head``, ``knee``, ``tail_ratio``, ``k``: ``head`` up to
                       index k-1, ``knee`` at k and k+1, then decaying by
                       ``tail_ratio``
    ``custom``         explicit non-increasing ``values``, zero-padded to length

    ``position`` and ``k`` default to ``k // 2`` and ``k`` of the trial;
    ``length`` defaults to ``min(n, m)``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    values: tuple = ()
    length: Optional[int] = None

    def __post_init__(self):
        if self.kind not in SPECTRUM_KINDS:
            raise ContractError(f"unknown spectrum kind {self.kind!r}; "
                                f"expected one of {', '.join(SPECTRUM_KINDS)}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind]) - {"position", "k"}
        if unknown:
            raise ContractError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        if self.kind == "custom":
            vals = np.asarray(self.values, dtype=np.float64)
            if vals.size == 0:
                raise ContractError("custom spectrum needs at least one value")
            if np.any(vals < 0) or np.any(np.diff(vals) > 0):
                raise ContractError("custom spectrum must be non-negative and non-increasing")

    @property
    def label(self):
        if self.kind == "custom":
            return "custom:" + ",".join(repr(float(v)) for v in self.values)
        if not self.params:
            return self.kind
        return self.kind + ":" + ",".join(f"{key}={float(self.params[key])!r}"
                                          for key in sorted(self.params))


def parse_spectrum(text):
    """Parse ``kind[:key=value,...]`` or ``custom:v1,v2,...``.

    >>> parse_spectrum("geometric:ratio=0.5").params
    {'ratio': 0.5}
    """
    kind, _, rest = text.strip().partition(":")
    rest = rest.strip()
    if kind == "custom":
        return SpectrumSpec("custom", values=tuple(float(v) for v in rest.split(",") if v))
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ContractError(f"spectrum parameter {item!r} is not key=value")
        params[key.strip()] = float(value)
    return SpectrumSpec(kind, params)


def make_spectrum(spec, length=None, k=None):
    """Realise ``spec`` as a non-increasing, non-negative vector.

    >>> make_spectrum(SpectrumSpec("geometric", {"start": 8, "ratio": 0.5}), 4)
    array([8., 4., 2., 1.])
    """
    length = spec.length if length is None else length
    if spec.kind == "custom":
        vals = np.array(spec.values, dtype=np.float64)
        if length is None:
            return vals
        if length < len(vals):
            raise ContractError(f"custom spectrum has {len(vals)} values, more than {length}")
        return np.concatenate([vals, np.zeros(length - len(vals))])
    if length is None or length < 1:
        raise ContractError("spectrum length must be a positive integer")
    p = {**_DEFAULTS[spec.kind], **spec.params}
    idx = np.arange(length)
    if spec.kind == "flat":
        out = np.full(length, p["value"])
    elif spec.kind == "geometric":
        if not 0.0 < p["ratio"] <= 1.0:
            raise ContractError(f"geometric ratio must lie in (0, 1], got {p['ratio']}")
        out = p["start"] * p["ratio"] ** idx
    elif spec.kind == "step":
        position = int(p.get("position", max(1, (k or 2) // 2)))
        out = np.where(idx < position, p["head"], p["head"] * p["ratio"])
    else:
        kk = int(p.get("k", k or 0))
        if not 1 <= kk < length:
            raise ContractError(f"zero-gap-at-k needs 1 <= k < length, got k={kk}")
        out = np.empty(length)
        out[:kk - 1] = p["head"]
        out[kk - 1:kk + 1] = p["knee"]
        out[kk + 1:] = p["knee"] * p["tail_ratio"] ** np.arange(1, length - kk)
    out = np.asarray(out, dtype=np.float64)
    if np.any(out < 0) or np.any(np.diff(out) > 0):
        raise ContractError(f"parameters {p} do not give a non-increasing spectrum")
    return out


def matrix_stream(matrix_seed):
    """Random stream for synthesising test matrices, disjoint from sketch streams."""
    return RngStream(derive_seed(0x6D61747269780A, matrix_seed), 0)


def synthesize_matrix(sigma, n, m, rng):
    """``U diag(sigma) V^T`` with random orthonormal ``U`` (n x r) and ``V`` (m x r)."""
    sigma = np.asarray(sigma, dtype=np.float64)
    r = len(sigma)
    if not 1 <= r <= min(n, m):
        raise ContractError(f"spectrum of length {r} does not fit a {n}x{m} matrix")
    if np.any(sigma < 0) or np.any(np.diff(sigma) > 0):
        raise ContractError("sigma must be non-negative and non-increasing")
    u = random_orthonormal(n, r, rng)
    v = random_orthonormal(m, r, rng)
    return (u * sigma) @ v.T


def roundtrip_ok(estimated, sigma):
    """Oracle singular values agree with the prescribed ones."""
    sigma = np.asarray(sigma, dtype=np.float64)
    est = np.asarray(estimated, dtype=np.float64)[:len(sigma)]
    atol = ROUNDTRIP_ATOL * max(1.0, float(sigma[0]))
    return bool(np.all(np.abs(est - sigma) <= ROUNDTRIP_RTOL * sigma + atol))


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class ExperimentRecord:
    """One trial: inputs, measured residual and the bound verdict.

    Trace columns are None unless the trial ran with the tracer.
    """

    n: int
    m: int
    k: int
    epsilon: float
    c: float
    t: Optional[int]
    seed: int
    stream: int
    spectrum: str
    sigma_kp1: Optional[float]
    residual: Optional[float]
    ratio: Optional[float]
    bound_ok: bool
    kprime: Optional[int] = None
    g2_norm: Optional[float] = None
    g1_inv_norm: Optional[float] = None
    min_t: Optional[float] = None
    worst_margin: Optional[float] = None
    tail: Optional[float] = None
    tail_limit: Optional[float] = None
    status: str = "ok"

    def to_row(self):
        return [_fmt(getattr(self, name)) for name in CSV_HEADER]


def _verdict(residual, sigma1, sigma_kp1, epsilon):
    # Returns (ratio, bound_ok); exact rank k is judged on absolute residual.
    if sigma_kp1 <= RANK_ZERO * sigma1:
        return residual, residual <= RANK_K_TOL * sigma1
    return residual / sigma_kp1, residual <= (1.0 + epsilon) * sigma_kp1 * (1.0 + BOUND_SLACK)


def _sanitize(exc):
    text = f"error:{type(exc).__name__}:{exc}"
    return " ".join(text.replace(",", ";").split())


def trial_on_matrix(a, sigma, label, k, epsilon, c, seed, stream, t, with_trace,
                    reorth_period, exact_residual, svd=None, reports=None):
    """One trial on an already built ``A`` with known spectrum ``sigma``.

    ``svd`` (the oracle factorisation of ``A``) is reused by the tracer when
    given; traced reports are appended to ``reports`` if it is a list.
    """
    n, m = a.shape
    base = dict(n=n, m=m, k=k, epsilon=epsilon, c=c, seed=seed, stream=stream,
                spectrum=label)
    try:
        cfg = IterationConfig(k=k, epsilon=epsilon, c=c, t_override=t,
                              reorth_period=reorth_period, seed=seed,
                              stream_index=stream, exact_residual=exact_residual)
        t_used = cfg.iterations(n)
        base["t"] = t_used
        sigma_kp1 = float(sigma[k]) if k < len(sigma) else 0.0
        base["sigma_kp1"] = sigma_kp1
        result = approximate_topk(a, cfg)
        ratio, ok = _verdict(result.residual, float(sigma[0]), sigma_kp1, epsilon)
        extra = {}
        if with_trace:
            rep = trace(a, cfg, svd=svd)
            if reports is not None:
                reports.append(rep)
            extra = dict(kprime=rep.kprime, g2_norm=rep.g2_norm,
                         g1_inv_norm=rep.g1_inv_norm, min_t=rep.min_t,
                         worst_margin=rep.worst_margin, tail=rep.tail_sum,
                         tail_limit=rep.tail_limit)
        return ExperimentRecord(**base, residual=result.residual, ratio=ratio,
                                bound_ok=bool(ok), **extra)
    except Exception as exc:  # recorded in the row; sweeps keep going
        base.setdefault("t", None)
        base.setdefault("sigma_kp1", None)
        return ExperimentRecord(**base, residual=None, ratio=None, bound_ok=False,
                                status=_sanitize(exc))


def build_matrix(spec, n, m, k, matrix_seed=0, matrix=None):
    """Return ``(A, sigma, label)`` for a trial.

    ``sigma`` is the prescribed spectrum zero-padded to ``min(n, m)``, or the
    oracle spectrum when an explicit ``matrix`` is supplied.
    """
    if matrix is not None:
        a = as_matrix(matrix, "matrix")
        return a, jacobi_svd(a).sigma, "file"
    sigma = make_spectrum(spec, spec.length or min(n, m), k)
    a = synthesize_matrix(sigma, n, m, matrix_stream(matrix_seed))
    full = np.zeros(min(n, m))
    full[:len(sigma)] = sigma
    return a, full, spec.label


def run_trial(spec, n, m, k, epsilon, c=1.0, seed=0, stream=0, with_trace=False, *,
              t=None, matrix_seed=0, reorth_period=1, exact_residual=False, matrix=None):
    """Synthesise ``A`` from ``spec`` (or use ``matrix``) and run one trial.

    ``A`` depends only on ``(spec, n, m, matrix_seed)``; ``seed`` and
    ``stream`` select the Gaussian sketch, so varying them probes the
    probability over the sketch for a fixed matrix. When ``matrix`` is given,
    ``sigma_(k+1)`` comes from the Jacobi oracle. Failures inside the trial are
    reported in the ``status`` column rather than raised.
    """
    if matrix is not None:
        n, m = np.shape(matrix)
    a, sigma, label = build_matrix(spec, n, m, k, matrix_seed, matrix)
    return trial_on_matrix(a, sigma, label, k, epsilon, c, seed, stream, t, with_trace,
                  reorth_period, exact_residual)


@dataclass(frozen=True)
class CellSummary:
    spectrum: str
    epsilon: float
    t_multiplier: float
    t: int
    trials: int
    failures: int
    failure_fraction: float
    median_ratio: Optional[float]
    median_block_condition: Optional[float]
    oracle_roundtrip_ok: Optional[bool]

    def to_row(self):
        return [_fmt(getattr(self, name)) for name in SUMMARY_HEADER]


@dataclass(frozen=True)
class SweepResult:
    records: list
    summary: list

    @property
    def all_failed(self):
        return bool(self.records) and not any(r.bound_ok for r in self.records)


def sweep(spectra, seeds, epsilons, t_multipliers=(1.0,), *, n, m, k, c=1.0, stream=0,
          matrix_seed=0, with_trace=False, reorth_period=1, exact_residual=False,
          block_condition=True):
    """Run every (spectrum, epsilon, t-multiplier, seed) combination.

    The iteration count of a cell is ``max(1, ceil(mult * choose_t(n, eps, c)))``,
    so a multiplier of 0 forces ``t = 1``. Records come back in grid order
    (spectra as given, then epsilon, multiplier, seed) independent of how
    the trials are scheduled. With ``block_condition`` the oracle SVD of each
    matrix is computed once to report the median ``|G'_2| |G'_1^-1|`` per cell
    and to confirm the synthesised spectrum.
    """
    seeds = sorted(int(s) for s in seeds)
    if not spectra or not seeds or not epsilons or not t_multipliers:
        raise ContractError("sweep grid must be non-empty")
    records, summary = [], []
    for spec in spectra:
        a, sigma, label = build_matrix(spec, n, m, k, matrix_seed, None)
        svd = jacobi_svd(a) if (block_condition or with_trace) else None
        roundtrip = roundtrip_ok(svd.sigma, sigma) if block_condition else None
        for eps in epsilons:
            for mult in t_multipliers:
                t = max(1, math.ceil(mult * choose_t(n, eps, c)))
                cell = [trial_on_matrix(a, sigma, label, k, eps, c, seed, stream, t, with_trace,
                               reorth_period, exact_residual, svd=svd) for seed in seeds]
                records.extend(cell)
                conditions = []
                if block_condition:
                    for seed in seeds:
                        cfg = IterationConfig(k=k, epsilon=eps, c=c, seed=seed,
                                              stream_index=stream)
                        g1, g2 = split_blocks(svd.v.T @ draw_sketch(m, cfg), k)
                        try:
                            conditions.append(gaussian_block_condition(g1, g2))
                        except ArithmeticError:
                            conditions.append(math.inf)
                ratios = [r.ratio for r in cell if r.ratio is not None]
                failures = sum(not r.bound_ok for r in cell)
                summary.append(CellSummary(
                    spectrum=label, epsilon=eps, t_multiplier=float(mult), t=t,
                    trials=len(cell), failures=failures,
                    failure_fraction=failures / len(cell),
                    median_ratio=float(np.median(ratios)) if ratios else None,
                    median_block_condition=(float(np.median(conditions))
                                            if conditions else None),
                    oracle_roundtrip_ok=roundtrip,
                ))
    return SweepResult(records=records, summary=summary)


def _write(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def format_records(records):
    """CSV text (header plus one row per record)."""
    return _write(CSV_HEADER, (r.to_row() for r in records))


def format_summary(summary):
    return _write(SUMMARY_HEADER, (s.to_row() for s in summary))
