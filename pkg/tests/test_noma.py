import numpy as np
import pytest

from conftest import paper_scenario, rate_scenario, rel_err
from mecoffload.noma import (power_for_ratio, sic_order, sic_rates,
                             solve_beta_n, solve_noma)
from mecoffload.scenario import Device, Scenario, SystemParams, link_rate


def test_power_zero_beta():
    sc = paper_scenario(5, 1)
    assert np.all(power_for_ratio(sc, 0.0) == 0.0)
    with pytest.raises(ValueError):
        power_for_ratio(sc, -0.1)


def test_power_single_device_inverse_shannon():
    # s*beta/B = 2, N0/h = 1  ->  P = 2^2 - 1 = 3
    sc = rate_scenario([1], [2], B=1.0, N0=1.0)  # gain 1 at rate 1
    p = power_for_ratio(sc, 1.0)
    assert p[0] == pytest.approx(3.0, rel=1e-12)


def test_power_round_trip_matches_sensing():
    # feeding P(beta) into the SIC rates returns r_n = s_n * beta exactly
    for seed in range(20):
        sc = paper_scenario(6, seed + 10)
        beta = 10 ** np.random.default_rng(seed).uniform(-3, 0.5)
        rates = sic_rates(sc, power_for_ratio(sc, beta))
        for n, d in enumerate(sc.devices):
            assert rates[n] == pytest.approx(d.sensing_s * beta, rel=1e-9)


def test_sic_rates_single_equals_link_rate():
    sc = paper_scenario(1, 4)
    r = sic_rates(sc, np.array([sc.devices[0].max_power_P]))
    assert r[0] == pytest.approx(link_rate(sc.devices[0], sc.system), rel=1e-12)


def test_sic_rates_two_device_hand_case():
    # P1 h1 = P2 h2 = N0: first decoded sees log2(1.5), second log2(2)
    system = SystemParams(bandwidth_B=1.0, noise_N0=1.0)
    devices = [Device(id=0, gain_h=2.0, sensing_s=1.0, max_power_P=0.5),
               Device(id=1, gain_h=1.0, sensing_s=1.0, max_power_P=1.0)]
    sc = Scenario(system=system, devices=devices)
    r = sic_rates(sc, np.array([0.5, 1.0]))
    assert r[0] == pytest.approx(np.log2(1.5), rel=1e-12)
    assert r[1] == pytest.approx(1.0, rel=1e-12)


def test_sic_sum_rate_independent_of_order():
    # Lemma-style identity: sum of rates = B log2(1 + sum P h / N0)
    for seed in range(20):
        sc = paper_scenario(7, seed + 30)
        rng = np.random.default_rng(seed)
        power = rng.uniform(0, 1, 7)
        rates = sic_rates(sc, power)
        expect = sc.system.bandwidth_B * np.log2(
            1.0 + np.sum(power * sc.gains()) / sc.system.noise_N0)
        assert np.sum(rates) == pytest.approx(expect, rel=1e-9)


def test_beta_single_device_closed_form():
    # P_cap*h/N0 = 3, s/B = 1  ->  2^beta = 4  ->  beta* = 2
    sc = rate_scenario([2], [1], B=1.0, N0=1.0)  # gain 3
    assert solve_beta_n(sc, 0) == pytest.approx(2.0, abs=1e-8)


def test_beta_monotone_in_power_cap():
    sc = paper_scenario(4, 9)
    base = [solve_beta_n(sc, n) for n in range(4)]
    for d in sc.devices:
        d.max_power_P *= 2.0
    boosted = [solve_beta_n(sc, n) for n in range(4)]
    assert all(b > a for a, b in zip(base, boosted))


def test_beta_matches_grid_scan():
    # independent oracle: evaluate the power formula on a 1e6-point beta grid
    # and locate where it crosses the cap
    for seed in range(5):
        sc = paper_scenario(3, seed + 60)
        order = sic_order(sc)
        B, N0 = sc.system.bandwidth_B, sc.system.noise_N0
        for n in range(3):
            beta = solve_beta_n(sc, n)
            hi = max(2.0 * beta, 1.0)
            grid = np.linspace(0.0, hi, 1_000_001)
            pos = order.index(n)
            tail = float(sum(sc.devices[k].sensing_s for k in order[pos + 1:]))
            d = sc.devices[n]
            p = (N0 / d.gain_h) * (2.0 ** (d.sensing_s * grid / B) - 1.0) \
                * 2.0 ** (tail * grid / B)
            over = p >= d.max_power_P
            assert over[-1] and not over[0]
            flip = int(np.argmax(over))
            assert abs(beta - grid[flip]) <= 2 * (hi / 1_000_000)


def test_solve_noma_hand_composition():
    # N=1, B=1, T=1, s=1, P_cap*h/N0 = 3, C=1: beta*=2, splits (0.4, 0.2, 0.4)
    sc = rate_scenario([2], [1], B=1.0, N0=1.0, T=1.0, C=1.0)
    out = solve_noma(sc)
    assert out.beta_star == pytest.approx(2.0, abs=1e-8)
    assert out.sense_ts == pytest.approx(0.4, rel=1e-8)
    assert out.offload_to == pytest.approx(0.2, rel=1e-8)
    assert out.compute_tc == pytest.approx(0.4, rel=1e-8)
    assert out.throughput == pytest.approx(0.4, rel=1e-8)


def test_solve_noma_large_capacity_limit():
    sc = paper_scenario(4, 21)
    sc.system.edge_capacity_C = 1e18
    out = solve_noma(sc)
    assert out.compute_tc <= 1e-6
    assert out.sense_ts == pytest.approx(
        sc.system.frame_T / (1 + 1 / out.beta_star), rel=1e-6)


def test_solve_noma_invariants():
    for seed in range(60):
        n = 1 + seed % 8
        sc = paper_scenario(n, seed + 200)
        out = solve_noma(sc)
        T = sc.system.frame_T
        assert out.sense_ts + out.offload_to + out.compute_tc == pytest.approx(T, rel=1e-9)
        caps = sc.powers()
        assert np.all(out.power <= caps * (1 + 1e-9))
        # at least one device is at its power cap
        assert np.min((caps - out.power) / caps) <= 1e-6
        # sensed == offloaded per device
        for k, d in enumerate(sc.devices):
            sensed = d.sensing_s * out.sense_ts
            sent = out.rates[k] * out.offload_to
            assert rel_err(sensed, sent) <= 1e-6
        assert np.sum(out.compute_share) == pytest.approx(sc.system.edge_capacity_C)
        # compute share proportional to rates
        ratio = out.compute_share / out.rates
        assert np.max(ratio) / np.min(ratio) == pytest.approx(1.0, rel=1e-9)
        # throughput identities
        assert out.throughput == pytest.approx(
            float(np.sum(out.rates)) * out.offload_to, rel=1e-6)
