"""End-to-end acceptance checks, one PASS/FAIL line per criterion.

The lines are collected in ``conftest.ACCEPTANCE`` and printed in the terminal
summary.  Run alone with ``pytest tests/test_acceptance.py -v``; the full suite
takes roughly a quarter of an hour, most of it in the FER comparison.
"""

import itertools
import time
from math import comb

import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import bec_entropy_table, bec_exact_D, ml_reference, code_frozen_rule, sc_reference
from polardesign.channel import entropy_table, reliability_frozen_set, reliability_sequence
from polardesign.cli import main
from polardesign.codec import DecoderConfig, PrecodedCode, SCLDecoder
from polardesign.design import best_of_runs
from polardesign.list_bounds import (
    bound_value, construct_set_Q, d_apx_profile, d_low_profile, d_tight_profile, d_up_profile,
    optimal_Q,
)
from polardesign.polar_core import complement, verify_kron_submatrix
from polardesign.presets import preset
from polardesign.sim import StopRule, awgn_bpsk_llrs, paired_simulation
from polardesign.weights import average_weight_distribution, exact_weight_distribution


def report(name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else "")
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


TABLE_I = {
    (128, 64): {8: 272, 12: 896, 16: 85423, 18: 6104},
    (128, 48): {16: 1864, 30: 1725681},
    (128, 80): {8: 4308, 14: 1077792},
}


def test_table_i_exact():
    t0 = time.perf_counter()
    misses = []
    for (N, K), ref in TABLE_I.items():
        W = average_weight_distribution(N, complement(reliability_frozen_set(7, K, 4.0), N))
        misses += [f"({N},{K}) W{t}={W.rounded(t)} vs {v}" for t, v in ref.items() if W.rounded(t) != v]
    wall = time.perf_counter() - t0
    report("Table I ensemble weights exact after rounding", not misses and wall < 10,
           "; ".join(misses) + f"; {wall:.1f}s")


def test_d_low_peak_512():
    t0 = time.perf_counter()
    A = complement(reliability_frozen_set(9, 256, 2.0), 512)
    peak = d_low_profile(A, entropy_table(9, 0.5, 0.5)).peak
    wall = time.perf_counter() - t0
    report("D_low peak of (512,256) reliability set", abs(peak - 0.953) <= 0.005 and wall < 5,
           f"peak {peak:.4f}, {wall:.2f}s")


def test_min_info_index():
    a128 = complement(reliability_frozen_set(7, 64, 3.5), 128).min()
    a512 = {eb: complement(reliability_frozen_set(9, 256, eb), 512).min() for eb in (2.0, 2.75)}
    seq = reliability_sequence(7, 3.5, 0.5)
    crc = [int(seq.r[128 - 64 - c:].min()) for c in range(15)]
    expect = [30, 30, 30, 29, 29, 29, 29, 29, 27, 27, 27, 27, 27, 27, 23]
    matches = [eb for eb, v in a512.items() if v == 95]
    report("min(A') and CRC-style min(A) sequence",
           a128 == 30 and matches and crc == expect,
           f"(128,64) {a128}; (512,256) {a512} matches at {matches}; sequence {crc}")


def test_bound_chain():
    rng = np.random.default_rng(2024)
    bad = 0
    for n in (6, 7, 9):
        N = 1 << n
        H = entropy_table(n, 0.5, 0.5)
        for _ in range(1000):
            K = int(rng.integers(1, N))
            A = np.sort(rng.choice(N, K, replace=False))
            lam = int(rng.integers(0, N + 1))
            lo, ti = d_low_profile(A, H).values, d_tight_profile(A, H).values
            ap, up = d_apx_profile(A, H, lam).values, d_up_profile(A, H).values
            eps = 1e-12
            bad += int(np.any(lo > ti + eps) or np.any(ti > ap + eps) or np.any(ap > up + eps))
    report("bound chain low <= tight <= apx <= up on 3000 random sets", bad == 0, f"{bad} violations")


def test_kron_and_bec_oracle():
    t0 = time.perf_counter()
    kron_ok = all(verify_kron_submatrix(n, Q) for n in range(1, 7)
                  for k in range(n + 1) for Q in itertools.combinations(range(n), k))
    bad = 0
    for eps in (0.3, 0.5):
        H = bec_entropy_table(3, eps)
        for F in itertools.combinations(range(8), 4):
            D = bec_exact_D(3, F, eps)
            A = complement(F, 8)
            bad += int(np.any(d_tight_profile(A, H).values > D + 1e-12)
                       or np.any(D > d_up_profile(A, H).values + 1e-12))
    wall = time.perf_counter() - t0
    report("Kronecker sub-matrix identity and BEC exact-entropy bracket", kron_ok and bad == 0 and wall < 120,
           f"kron {kron_ok}, {bad} BEC violations, {wall:.1f}s")


def test_greedy_vs_optimal_Q():
    rng = np.random.default_rng(99)
    tables = {n: entropy_table(n, 0.5, 0.5) for n in range(1, 7)}
    worse = equal = 0
    trials = 10_000
    for _ in range(trials):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 1 << n))
        prefix = [i for i in range(m) if rng.random() < 0.5]
        H = tables[n]
        g = bound_value(n, m, construct_set_Q(n, m, prefix), H)
        o = bound_value(n, m, optimal_Q(n, m, prefix, H), H)
        worse += int(g < o - 1e-15)
        equal += int(abs(g - o) <= 1e-15)
    report("greedy Q bound never below exhaustive optimum", worse == 0,
           f"{worse} violations, equality rate {equal / trials:.3f}")


def test_weight_mass():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(200):
        N = 1 << int(rng.integers(1, 8))
        K = int(rng.integers(1, N + 1))
        W = average_weight_distribution(N, rng.choice(N, K, replace=False))
        worst = max(worst, abs(W.total() - (2.0**K - 1)) / (2.0**K - 1))
    binom = all(abs(average_weight_distribution(N, np.arange(N)).get(t) - comb(N, t)) <= 1e-9 * comb(N, t)
                for N in (8, 32, 128) for t in range(1, N + 1))
    report("weight-distribution mass and full-rate binomial", worst <= 1e-9 and binom,
           f"worst relative mass error {worst:.1e}, binomial {binom}")


def test_ensemble_consistency():
    rng = np.random.default_rng(16)
    # frozen bits after several information bits, so the spectrum actually varies
    frozen = np.array([0, 1, 2, 4, 8, 9, 10, 12])
    draws = np.array([exact_weight_distribution(PrecodedCode.random_expressions(16, frozen, rng)).values()
                      for _ in range(2000)])
    mean, se = draws.mean(axis=0), draws.std(axis=0, ddof=1) / np.sqrt(len(draws))
    ref = average_weight_distribution(16, complement(frozen, 16)).values()
    z = np.abs(mean - ref) / np.where(se > 0, se, np.inf)
    fixed_ok = np.allclose(mean[se == 0], ref[se == 0], atol=1e-9)
    report("(16,8) ensemble mean within 3 standard errors",
           bool(z.max() <= 3 and fixed_ok and np.count_nonzero(se) >= 3),
           f"max z {z.max():.2f} over {np.count_nonzero(se)} random weights")


def test_decoder_oracles():
    rng = np.random.default_rng(8)
    code = PrecodedCode.with_omega(128, reliability_frozen_set(7, 64, 3.5))
    info = rng.integers(0, 2, size=(1000, 64), dtype=np.uint8)
    llrs = awgn_bpsk_llrs(code.encode(info), 2.0, 0.5, rng)
    u, _ = SCLDecoder(code, DecoderConfig(1)).decode_inputs(llrs)
    rule = code_frozen_rule(code)
    sc_bad = sum(not np.array_equal(u[k], sc_reference(llrs[k], rule)) for k in range(1000))

    small = PrecodedCode.with_omega(16, reliability_frozen_set(4, 8, 2.0))
    info = rng.integers(0, 2, size=(10_000, 8), dtype=np.uint8)
    llrs = awgn_bpsk_llrs(small.encode(info), 0.0, 0.5, rng)
    dec, _ = SCLDecoder(small, DecoderConfig(256)).decode(llrs)
    ml_bad = compared = 0
    for k in range(llrs.shape[0]):
        ml, unique = ml_reference(small, llrs[k])
        if unique:
            compared += 1
            ml_bad += int(not np.array_equal(dec[k], ml))

    noiseless_bad = 0
    for c in (code, small, PrecodedCode.plain(64, reliability_frozen_set(6, 32, 2.0))):
        words = rng.integers(0, 2, size=(50, c.K), dtype=np.uint8)
        for L in (1, 8, 32):
            d, _ = SCLDecoder(c, DecoderConfig(L)).decode(10.0 * (1.0 - 2.0 * c.encode(words)))
            noiseless_bad += int(not np.array_equal(d, words))
    report("decoder oracles: L=1 is SC, L=256 is ML, noiseless exact",
           sc_bad == 0 and ml_bad == 0 and noiseless_bad == 0,
           f"SC mismatches {sc_bad}/1000, ML mismatches {ml_bad}/{compared}, noiseless failures {noiseless_bad}")


def test_design_scale_and_fer():
    p128 = preset(128, 64)
    H = entropy_table(7, p128.entropy_EbN0, 0.5)
    seq = reliability_sequence(7, p128.reliability_EbN0, 0.5)
    t0 = time.perf_counter()
    its, winners = [], {}
    for td in np.round(np.arange(1.0, 2.0001, 0.1), 10):
        w, runs, _ = best_of_runs("tb", p128.config(T_D=float(td)), 128, 64, H, seq)
        its += [r.iterations for r in runs]
        winners[float(td)] = w
    sweep = time.perf_counter() - t0
    it128 = float(np.mean(its))

    p512 = preset(512, 256)
    H5 = entropy_table(9, p512.entropy_EbN0, 0.5)
    seq5 = reliability_sequence(9, p512.reliability_EbN0, 0.5)
    t0 = time.perf_counter()
    _, runs, _ = best_of_runs("tb", p512.config(T_D=1.5), 512, 256, H5, seq5)
    point = time.perf_counter() - t0
    it512 = float(np.mean([r.iterations for r in runs]))

    designed = PrecodedCode.with_omega(128, winners[2.0].frozen_set)
    base = PrecodedCode.with_omega(128, seq.least_reliable(64))
    res = paired_simulation([designed, base], DecoderConfig(32), 3.5, StopRule(1000), seed=0,
                            code_ids=["designed", "R0"], stop_on="any")
    d, b = res
    separated = d.interval()[1] < b.interval()[0]
    ok = (sweep < 60 and point < 300 and 21 <= it128 <= 63 and 49 <= it512 <= 147
          and max(d.errors, b.errors) >= 1000 and separated)
    report("design-loop scale and FER gain over R0", ok,
           f"sweep {sweep:.1f}s, 512 point {point:.1f}s, iterations {it128:.1f}/{it512:.1f}, "
           f"FER designed {d.fer:.3e}+-{d.ci95:.1e} vs R0 {b.fer:.3e}+-{b.ci95:.1e} over {d.frames} frames")


def test_determinism(tmp_path):
    f = tmp_path / "r0.txt"
    same = []

    def twice(args, outputs):
        for tag in ("a", "b"):
            assert main([a.replace("{out}", str(tmp_path / tag)) for a in args]) == 0
        return all((tmp_path / "a" / o).read_bytes() == (tmp_path / "b" / o).read_bytes() for o in outputs)

    assert main(["export", "reliability", "--code", "128,64", "--reliability-ebn0", "3.5", "--out", str(f)]) == 0
    same.append(twice(["entropies", "--n", "7", "--ebn0", "0.5", "--out", "{out}"],
                      ["entropies.txt", "reliability.txt"]))
    same.append(twice(["bounds", str(f), "--out", "{out}"], ["r0.low.txt", "r0.tight.txt", "r0.apx.txt", "r0.up.txt"]))
    same.append(twice(["design", "--paper-defaults", "128,64", "--td", "1.4,1.8", "--rho", "2", "--out", "{out}"],
                      ["runs.txt", "front.txt"]))
    sets = sorted(p.name for p in (tmp_path / "a" / "sets").iterdir())
    same.append(all((tmp_path / "a" / "sets" / s).read_bytes() == (tmp_path / "b" / "sets" / s).read_bytes()
                    for s in sets))
    (tmp_path / "a").mkdir(exist_ok=True)
    (tmp_path / "b").mkdir(exist_ok=True)
    same.append(twice(["simulate", str(f), "--L", "1,8", "--ebn0", "2,3", "--target-errors", "20",
                       "--seed", "5", "--out", "{out}/sim.txt"], ["sim.txt"]))
    report("design and simulation outputs byte-identical on rerun", all(same), f"{same}")
