"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest -v -s tests/test_acceptance.py` to see the per-criterion
lines. The three Monte Carlo row sets (heterogeneous-sensing N sweep,
equal-sensing N sweep, capacity sweep) are session fixtures shared between
criteria; everything else is computed inline.
"""

import math
import os
import time
import warnings

import numpy as np
import pytest

from conftest import rel_err
from mecoffload import lp_solver
from mecoffload.fdma import solve_fdma
from mecoffload.harness import (ExperimentConfig, run_sweep, scenario_for,
                                summarize)
from mecoffload.noma import (power_for_ratio, sic_order, solve_beta_n,
                             solve_noma)
from mecoffload.noma_timesharing import closed_form_fixed
from mecoffload.scenario import SystemParams, generate_scenario
from mecoffload.tdma import exhaustive_sequence_search, solve_tdma
from test_fdma import brute_force_fdma

WORKERS = min(2, os.cpu_count() or 1)
N_GRID = [4, 8, 12, 16, 20, 24]
CAPACITY_GRID = [0.25e7, 0.5e7, 1e7, 2e7, 4e7]


def report(num, name, ok, detail):
    print(f"\nACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def _by_trial(rows):
    return {(r.scheme, r.sweep_value, r.trial): r for r in rows}


@pytest.fixture(scope="session")
def hetero_rows():
    cfg = ExperimentConfig(sweep_kind="device_count", sweep_values=N_GRID,
                           schemes=["tdma", "noma_fixed", "fdma"],
                           trial_count=500, seed=42)
    return run_sweep(cfg, workers=WORKERS)


@pytest.fixture(scope="session")
def equal_rows():
    cfg = ExperimentConfig(sweep_kind="device_count", sweep_values=N_GRID,
                           schemes=["tdma", "noma_fixed", "noma_timesharing"],
                           trial_count=500, seed=43, equal_sensing=5e5)
    return run_sweep(cfg, workers=WORKERS)


@pytest.fixture(scope="session")
def capacity_rows():
    cfg = ExperimentConfig(sweep_kind="capacity", sweep_values=CAPACITY_GRID,
                           schemes=["tdma", "tdma_async", "noma_fixed", "fdma"],
                           trial_count=500, seed=44, n_devices=12)
    return run_sweep(cfg, workers=WORKERS)


def test_criterion_01_theorem1_oracle_equivalence():
    t0 = time.time()
    mismatches = 0
    for i in range(200):
        n = 2 + i % 6
        sc = generate_scenario(SystemParams(), n, (5e5, 5e5), seed=10_000 + i)
        ours = solve_tdma(sc).weighted_throughput
        _, best = exhaustive_sequence_search(sc)
        if rel_err(ours, best.weighted_throughput) > 1e-12:
            mismatches += 1
    elapsed = time.time() - t0
    ok = mismatches == 0 and elapsed < 60
    report(1, "theorem-1 oracle equivalence", ok,
           f"{200 - mismatches}/200 exact at 1e-12, {elapsed:.1f}s (< 60s)")


def test_criterion_02_heterogeneous_sensing_optimality():
    counterexamples = []
    for i in range(200):
        n = 2 + i % 6
        s_max = [3e5, 13e5, 23e5][i % 3]
        sc = generate_scenario(SystemParams(), n, (1e5, s_max), seed=20_000 + i)
        ours = solve_tdma(sc).weighted_throughput
        seq, best = exhaustive_sequence_search(sc)
        if best.weighted_throughput > ours * (1 + 1e-12):
            counterexamples.append((i, n, s_max, seq.slot_to_device,
                                    ours, best.weighted_throughput))
    if counterexamples:
        for c in counterexamples:
            print(f"  counterexample: seed={20_000 + c[0]} N={c[1]} s_max={c[2]} "
                  f"best_seq={c[3]} ours={c[4]:.6e} best={c[5]:.6e}")
        warnings.warn(f"ascending-order optimality counterexamples found: "
                      f"{len(counterexamples)}/200 (reported above)")
    report(2, "heterogeneous-s empirical optimality", True,
           f"{200 - len(counterexamples)}/200 equal at 1e-12; "
           f"{len(counterexamples)} counterexamples (soft criterion, all reported)")


def test_criterion_03_sequence_gap_magnitudes():
    t0 = time.time()
    cfg = ExperimentConfig(sweep_kind="device_count", sweep_values=[24],
                           schemes=["tdma", "tdma_random", "tdma_desc_r"],
                           trial_count=500, seed=45)
    rows = run_sweep(cfg, workers=WORKERS)
    elapsed = time.time() - t0
    assert not any(r.failed for r in rows)
    table = summarize(rows)
    m = {s: table[(s, 24.0)]["mean_throughput"] for s in cfg.schemes}
    vs_random = m["tdma"] / m["tdma_random"] - 1
    vs_desc = m["tdma"] / m["tdma_desc_r"] - 1
    ok = 0.06 <= vs_random <= 0.22 and 0.20 <= vs_desc <= 0.40 and elapsed < 600
    report(3, "sequence-gap magnitudes", ok,
           f"vs random {vs_random * 100:.1f}% (window [6,22]), "
           f"vs desc-rate {vs_desc * 100:.1f}% (window [20,40]), "
           f"{elapsed:.0f}s (< 600s)")


def test_criterion_04_async_dominance():
    cfg = ExperimentConfig(sweep_kind="device_count", sweep_values=[24],
                           schemes=["tdma", "tdma_async"],
                           trial_count=500, seed=46)
    rows = run_sweep(cfg, workers=WORKERS)
    assert not any(r.failed for r in rows)
    by = _by_trial(rows)
    gains = []
    dominated = 0
    for t in range(500):
        sync = by[("tdma", 24.0, t)].sum_throughput_bits
        asy = by[("tdma_async", 24.0, t)].sum_throughput_bits
        if asy >= sync * (1 - 1e-9):
            dominated += 1
        gains.append(asy / sync - 1)
    mean_gain = float(np.mean(gains))
    ok = dominated == 500 and mean_gain > 0
    report(4, "asynchronous-computing dominance", ok,
           f"{dominated}/500 trials async >= sync, mean improvement "
           f"{mean_gain * 100:.2f}% (> 0)")


def test_criterion_05_noma_closed_form_identities():
    worst_res = 0.0
    worst_budget = 0.0
    worst_cap = 0.0
    grid_checked = 0
    grid_bad = 0
    for i in range(500):
        n = 1 + i % 8
        sc = generate_scenario(SystemParams(), n, (1e5, 1e6), seed=30_000 + i)
        out = solve_noma(sc)
        T = sc.system.frame_T
        worst_budget = max(worst_budget,
                           abs(out.sense_ts + out.offload_to + out.compute_tc - T) / T)
        res = max(abs(d.sensing_s * out.sense_ts - out.rates[k] * out.offload_to)
                  / (d.sensing_s * out.sense_ts)
                  for k, d in enumerate(sc.devices))
        worst_res = max(worst_res, res)
        caps = sc.powers()
        worst_cap = max(worst_cap, float(np.min((caps - out.power) / caps)))
        if n <= 4 and grid_checked < 60:
            order = sic_order(sc)
            for dev in range(n):
                grid_checked += 1
                beta = solve_beta_n(sc, dev)
                hi = max(2.0 * beta, 1.0)
                grid = np.linspace(0.0, hi, 1_000_001)
                pos = order.index(dev)
                tail = float(sum(sc.devices[k].sensing_s for k in order[pos + 1:]))
                d = sc.devices[dev]
                B, N0 = sc.system.bandwidth_B, sc.system.noise_N0
                p = (N0 / d.gain_h) * (2.0 ** (d.sensing_s * grid / B) - 1.0) \
                    * 2.0 ** (tail * grid / B)
                flip = int(np.argmax(p >= d.max_power_P))
                if abs(beta - grid[flip]) > 2 * (hi / 1_000_000):
                    grid_bad += 1
    ok = (worst_res <= 1e-6 and worst_budget <= 1e-9 and worst_cap <= 1e-6
          and grid_bad == 0)
    report(5, "NOMA closed-form identities", ok,
           f"max sense/offload residual {worst_res:.2e} (<=1e-6), "
           f"max budget error {worst_budget:.2e} (<=1e-9), "
           f"worst cap margin {worst_cap:.2e} (<=1e-6), "
           f"grid oracle {grid_checked - grid_bad}/{grid_checked}")


def test_criterion_06_theorem3_dominance(equal_rows):
    assert not any(r.failed for r in equal_rows)
    by = _by_trial(equal_rows)
    dominated = 0
    total = 0
    for n in N_GRID:
        for t in range(500):
            fixed = by[("noma_fixed", float(n), t)].sum_throughput_bits
            sharing = by[("noma_timesharing", float(n), t)].sum_throughput_bits
            total += 1
            if sharing >= fixed * (1 - 1e-9):
                dominated += 1
    # closed-form cross-check on a per-N subsample of the same scenarios
    cfg = ExperimentConfig(sweep_kind="device_count", sweep_values=N_GRID,
                           schemes=["noma_fixed"], trial_count=500, seed=43,
                           equal_sensing=5e5)
    worst_cf = 0.0
    for n in N_GRID:
        for t in range(0, 500, 5):
            sc = scenario_for(cfg, float(n), t)
            fixed = by[("noma_fixed", float(n), t)].sum_throughput_bits
            worst_cf = max(worst_cf, rel_err(closed_form_fixed(sc), fixed))
    ok = dominated == total and worst_cf <= 1e-6
    report(6, "theorem-3 time-sharing dominance", ok,
           f"{dominated}/{total} trials sharing >= fixed, closed-form max "
           f"rel err {worst_cf:.2e} (<= 1e-6)")


def test_criterion_07_scheme_ordering(hetero_rows, equal_rows):
    het = summarize(hetero_rows)
    eq = summarize(equal_rows)
    bad = []
    for n in N_GRID:
        t = het[("tdma", float(n))]["mean_throughput"]
        f = het[("noma_fixed", float(n))]["mean_throughput"]
        d = het[("fdma", float(n))]["mean_throughput"]
        if not (t >= f >= d):
            bad.append(f"hetero N={n}: tdma={t:.4g} noma={f:.4g} fdma={d:.4g}")
        ts = eq[("noma_timesharing", float(n))]["mean_throughput"]
        te = eq[("tdma", float(n))]["mean_throughput"]
        if not ts >= te:
            bad.append(f"equal N={n}: sharing={ts:.4g} tdma={te:.4g}")
    report(7, "scheme throughput ordering", not bad,
           "tdma >= noma_fixed >= fdma at every N (hetero) and "
           "noma_timesharing >= tdma at every N (equal s)"
           if not bad else "; ".join(bad))


def test_criterion_08_fairness_ordering(hetero_rows, equal_rows):
    het = summarize(hetero_rows)
    eq = summarize(equal_rows)
    bad = []
    for n in N_GRID:
        jn = het[("noma_fixed", float(n))]["mean_jfi"]
        jt = het[("tdma", float(n))]["mean_jfi"]
        jf = het[("fdma", float(n))]["mean_jfi"]
        if not (jn >= jt >= jf):
            bad.append(f"hetero N={n}: noma={jn:.3f} tdma={jt:.3f} fdma={jf:.3f}")
    for n in (4, 8, 12):
        js = eq[("noma_timesharing", float(n))]["mean_jfi"]
        if js < 0.99:
            bad.append(f"equal N={n}: sharing JFI {js:.4f} < 0.99")
    report(8, "fairness-index ordering", not bad,
           "JFI noma_fixed >= tdma >= fdma at every N; equal-s time sharing "
           ">= 0.99 at N <= 12" if not bad else "; ".join(bad))


def test_criterion_09_capacity_monotonicity(capacity_rows):
    table = summarize(capacity_rows)
    bad = []
    for scheme in ("tdma", "tdma_async", "noma_fixed", "fdma"):
        means = [table[(scheme, c)]["mean_throughput"] for c in CAPACITY_GRID]
        for lo, hi in zip(means, means[1:]):
            if hi < lo * (1 - 1e-9):
                bad.append(f"{scheme}: {means}")
                break
    report(9, "capacity monotonicity", not bad,
           "mean throughput nondecreasing over C grid for every scheme"
           if not bad else "; ".join(bad))


def _random_lp(rng):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 8))
    rows = []
    x0 = rng.uniform(0, 1, n)
    n_eq = 0
    for _ in range(m - 1):
        a = rng.uniform(-1, 1, n)
        kind = rng.random()
        if kind < 0.6:
            rows.append((a, "<=", float(a @ x0 + rng.uniform(0, 1))))
        elif kind < 0.8:
            rows.append((a, ">=", float(a @ x0 - rng.uniform(0, 1))))
        elif n_eq < n - 1:
            # equality count stays below n_vars so the region keeps vertices
            rows.append((a, "=", float(a @ x0)))
            n_eq += 1
        else:
            rows.append((a, "<=", float(a @ x0 + rng.uniform(0, 1))))
    rows.append((np.ones(n), "<=", float(np.sum(x0) + rng.uniform(0.5, 3))))
    return lp_solver.LinearProgram(
        sense="max" if rng.random() < 0.7 else "min",
        objective=rng.uniform(-1, 1, n), rows=rows, n_vars=n)


def test_criterion_10_lp_solver_correctness():
    rng = np.random.default_rng(2024)
    mismatches = 0
    optimal = 0
    for _ in range(1000):
        lp = _random_lp(rng)
        sol = lp_solver.solve(lp)
        try:
            oracle = lp_solver.vertex_enumeration_oracle(lp)
        except lp_solver.NoFeasibleVertexError:
            if sol.status != lp_solver.INFEASIBLE:
                mismatches += 1
            continue
        if sol.status != lp_solver.OPTIMAL:
            mismatches += 1
            continue
        optimal += 1
        if abs(sol.objective_value - oracle) > 1e-9 * (1 + abs(oracle)):
            mismatches += 1
    # known degenerate program must terminate at the enumerated optimum
    beale = lp_solver.LinearProgram(sense="min",
                                    objective=np.array([-0.75, 150, -0.02, 6]),
                                    rows=[(np.array([0.25, -60, -0.04, 9]), "<=", 0.0),
                                          (np.array([0.5, -90, -0.02, 3]), "<=", 0.0),
                                          (np.array([0.0, 0.0, 1.0, 0.0]), "<=", 1.0)],
                                    n_vars=4)
    sol = lp_solver.solve(beale)
    degenerate_ok = (sol.status == lp_solver.OPTIMAL and
                     abs(sol.objective_value -
                         lp_solver.vertex_enumeration_oracle(beale)) <= 1e-9)
    ok = mismatches == 0 and degenerate_ok
    report(10, "LP solver vs vertex oracle", ok,
           f"1000 random LPs ({optimal} feasible-bounded) matched at 1e-9 "
           f"with {mismatches} mismatches; degenerate LP terminated "
           f"{'optimally' if degenerate_ok else 'INCORRECTLY'}")


def test_criterion_11_fdma_oracle():
    worst_gap = 0.0
    worst_dev = 0.0
    for i in range(50):
        n = 1 + i % 3
        sc = generate_scenario(SystemParams(), n, (1e5, 1e6), seed=40_000 + i)
        out = solve_fdma(sc)
        oracle = brute_force_fdma(sc)
        worst_dev = max(worst_dev, abs(out.total - oracle) / max(oracle, 1e-9))
        worst_gap = max(worst_gap,
                        (out.upper_bound - out.total) / max(out.total, 1e-9))
    ok = worst_dev <= 1e-3 and worst_gap <= 1e-4
    report(11, "FDMA brute-force oracle", ok,
           f"max |solver - brute force| {worst_dev:.2e} (<= 1e-3), "
           f"max tangent gap {worst_gap:.2e} (<= 1e-4 at K=64)")
