"""Exit criteria for the package, one test per criterion.

Each test prints a single ``criterion N: PASS/FAIL`` line with the measured
quantities, so ``pytest tests/test_acceptance.py`` doubles as a report.
"""

import time

import numpy as np
import pytest

from gapfree.cli import main
from gapfree.dense import jacobi_svd
from gapfree.harness import (make_spectrum, matrix_stream, parse_spectrum, roundtrip_ok,
                             sweep, synthesize_matrix)
from gapfree.iteration import IterationConfig, choose_t
from gapfree.sketch import RngStream, gaussian_matrix
from gapfree.tracer import gaussian_block_condition, split_blocks, trace

N, K, EPS, C, SEEDS = 200, 10, 0.25, 1.0, 100
FAMILIES = ("flat", "geometric:ratio=0.9", "step", "zero-gap-at-k")


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


@pytest.fixture(scope="module")
def main_sweep():
    start = time.perf_counter()
    result = sweep([parse_spectrum(f) for f in FAMILIES], range(SEEDS), [EPS], [1.0],
                   n=N, m=N, k=K, c=C)
    return result, time.perf_counter() - start


def test_1_oracle_accuracy(report):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst_recon, worst_roundtrip, all_ok = 0.0, True, True
    for i in range(50):
        n = int(rng.integers(2, 101))
        m = int(rng.integers(1, min(n, 80) + 1))
        a = rng.standard_normal((n, m)) * 10.0 ** rng.uniform(-3, 3)
        f = jacobi_svd(a)
        recon = np.linalg.norm(f.reconstruct() - a) / (f.sigma[0] + 1.0)
        worst_recon = max(worst_recon, recon)
        all_ok &= recon <= 1e-10
        sigma = np.sort(rng.uniform(0.01, 10.0, min(n, m)))[::-1]
        sigma[rng.random(len(sigma)) < 0.1] = 0.0
        sigma = np.sort(sigma)[::-1]
        est = jacobi_svd(synthesize_matrix(sigma, n, m, matrix_stream(i))).sigma
        worst_roundtrip &= roundtrip_ok(est, sigma)
    elapsed = time.perf_counter() - start
    ok = all_ok and worst_roundtrip and elapsed < 30
    report(1, ok, f"max |USV'-A|_F/(s1+1) = {worst_recon:.2e} (<= 1e-10), "
                  f"round-trip ok = {worst_roundtrip}, {elapsed:.1f}s (< 30s)")
    assert ok


def test_2_residual_bound(main_sweep, report):
    result, elapsed = main_sweep
    t = choose_t(N, EPS, C)
    rates = {c.spectrum: 1.0 - c.failure_fraction for c in result.summary}
    ok = (t == 27 and all(r.t == 27 for r in result.records)
          and all(rate >= 0.95 for rate in rates.values()) and elapsed < 120)
    report(2, ok, "t = %d, pass rates %s, %.1fs (< 120s)" % (
        t, {k: f"{v:.0%}" for k, v in rates.items()}, elapsed))
    assert ok


def test_3_gap_independence(main_sweep, report):
    result, _ = main_sweep
    sigma = make_spectrum(parse_spectrum("zero-gap-at-k"), N, K)
    gapless = [r for r in result.records if r.spectrum == "zero-gap-at-k"]
    gapped_t = {r.t for r in result.records if r.spectrum != "zero-gap-at-k"}
    rate = np.mean([r.bound_ok for r in gapless])
    ok = (sigma[K - 1] == sigma[K] and len(gapless) == SEEDS
          and {r.t for r in gapless} == gapped_t and rate >= 0.95)
    report(3, ok, f"sigma_k == sigma_(k+1): {sigma[K - 1] == sigma[K]}, "
                  f"t = {sorted(gapped_t)}, pass rate {rate:.0%} (>= 95%)")
    assert ok


def test_4_eckart_young_floor(main_sweep, report):
    result, _ = main_sweep
    shortfalls = []
    for fam in FAMILIES:
        sigma = make_spectrum(parse_spectrum(fam), N, K)
        for r in (r for r in result.records if r.spectrum == parse_spectrum(fam).label):
            shortfalls.append((sigma[K] - 1e-8 * sigma[0]) - r.residual)
    ok = len(shortfalls) == 4 * SEEDS and max(shortfalls) <= 0.0
    report(4, ok, f"{len(shortfalls)} trials, max (floor - residual) = {max(shortfalls):.2e}")
    assert ok


def test_5_proof_tracer(report):
    n, k = 60, 5
    start = time.perf_counter()
    counts = dict(trials=0, norm=0, energy=0, margins=0, tail=0, sufficiency=0, applicable=0)
    for fam in FAMILIES:
        sigma = make_spectrum(parse_spectrum(fam), n, k)
        a = synthesize_matrix(sigma, n, n, matrix_stream(0))
        svd = jacobi_svd(a)
        for seed in range(50):
            rep = trace(a, IterationConfig(k=k, epsilon=EPS, c=C, seed=seed), svd=svd)
            counts["trials"] += 1
            counts["norm"] += abs(np.linalg.norm(rep.y) - 1.0) <= 1e-9
            counts["energy"] += rep.energy_identity_gap <= 1e-6
            counts["margins"] += rep.margins_ok
            counts["tail"] += rep.tail_ok
            if rep.t_used >= rep.min_t:
                counts["applicable"] += 1
                counts["sufficiency"] += rep.bound_ok
    elapsed = time.perf_counter() - start
    trials = counts["trials"]
    ok = (all(counts[key] == trials for key in ("norm", "energy", "margins", "tail"))
          and counts["sufficiency"] == counts["applicable"] and elapsed < 60)
    report(5, ok, f"{trials} traces: |y|=1 {counts['norm']}, energy identity "
                  f"{counts['energy']}, y1 margins {counts['margins']}, tail {counts['tail']}, "
                  f"bound when t >= min_t {counts['sufficiency']}/{counts['applicable']}, "
                  f"{elapsed:.1f}s (< 60s)")
    assert ok


def test_6_block_condition_growth(report):
    start = time.perf_counter()
    medians = {}
    for n in (50, 100, 200, 400):
        vals = [gaussian_block_condition(*split_blocks(
            gaussian_matrix(n, K, RngStream(seed, n)), K)) for seed in range(200)]
        medians[n] = float(np.median(vals))
    elapsed = time.perf_counter() - start
    growth = medians[400] / medians[50]
    ok = all(np.isfinite(v) for v in medians.values()) and growth <= 512 and elapsed < 60
    report(6, ok, "medians %s, growth 400/50 = %.2f (<= 512), %.1fs" % (
        {n: round(v, 2) for n, v in medians.items()}, growth, elapsed))
    assert ok


def test_7_cli_determinism(tmp_path, report, capsys):
    invocations = {
        "run": ["run", "--n", "40", "--k", "4", "--seed", "7", "--spectrum", "zero-gap-at-k"],
        "run-trace": ["run", "--n", "40", "--k", "4", "--trace", "--seed", "3"],
        "trace": ["trace", "--n", "40", "--k", "4", "--seed", "5", "--spectrum", "step"],
        "sweep": ["sweep", "--n", "40", "--k", "4", "--seeds", "5", "--eps", "0.25", "0.5",
                  "--t-mult", "0", "1"],
    }
    identical = {}
    for name, argv in invocations.items():
        outputs = []
        for rep in range(2):
            path = tmp_path / f"{name}-{rep}.csv"
            main(argv + ["--out", str(path)])
            outputs.append(path.read_bytes())
        identical[name] = outputs[0] == outputs[1] and len(outputs[0]) > 0
    capsys.readouterr()
    ok = all(identical.values())
    report(7, ok, f"byte-identical CSV: {identical}")
    assert ok


def test_8_t_schedule_is_load_bearing(report):
    spec = parse_spectrum("geometric:ratio=0.99")
    result = sweep([spec], range(SEEDS), [0.1], [0.0], n=N, m=N, k=K,
                   block_condition=False)
    (cell,) = result.summary
    ratios = [r.ratio for r in result.records]
    ok = cell.t == 1 and cell.failures >= 1
    report(8, ok, f"t = {cell.t}, failures {cell.failures}/{cell.trials} (need >= 1); "
                  f"max residual/sigma_(k+1) = {max(ratios):.4f} vs allowed 1.1")
    assert ok
