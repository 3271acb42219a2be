import numpy as np
import pytest

from mecoffload.scenario import (Device, Scenario, SystemParams,
                                 generate_scenario, link_rate,
                                 scenario_from_json, scenario_to_json)


def test_paper_defaults():
    p = SystemParams()
    assert p.frame_T == 1.0
    assert p.bandwidth_B == 1e6
    assert p.noise_N0 == 1e-9
    assert p.edge_capacity_C == 1e7
    assert p.pathloss_c == 1e-3
    assert p.pathloss_gamma == 3.5


def test_generate_basic_ranges():
    sc = generate_scenario(SystemParams(), 8, (1e5, 1e6), seed=7)
    assert sc.n_devices == 8
    for d in sc.devices:
        assert d.gain_h > 0
        assert 1e5 <= d.sensing_s <= 1e6
        assert 0 < d.distance_d <= 50
        assert d.max_power_P == 1.0
        assert d.weight_w == 1.0


def test_generate_deterministic():
    a = generate_scenario(SystemParams(), 6, (1e5, 1e6), seed=123)
    b = generate_scenario(SystemParams(), 6, (1e5, 1e6), seed=123)
    assert scenario_to_json(a) == scenario_to_json(b)
    c = generate_scenario(SystemParams(), 6, (1e5, 1e6), seed=124)
    assert scenario_to_json(a) != scenario_to_json(c)


def test_generate_degenerate_sensing_range():
    sc = generate_scenario(SystemParams(), 1, (5e5, 5e5), seed=0)
    assert sc.devices[0].sensing_s == 5e5


def test_generate_rejects_bad_range():
    with pytest.raises(ValueError):
        generate_scenario(SystemParams(), 4, (0.0, 1e6), seed=1)
    with pytest.raises(ValueError):
        generate_scenario(SystemParams(), 4, (2e6, 1e6), seed=1)
    with pytest.raises(ValueError):
        generate_scenario(SystemParams(), 0, (1e5, 1e6), seed=1)


def test_pathloss_model_with_unit_fading():
    p = SystemParams()
    sc = generate_scenario(p, 20, (1e5, 1e6), seed=5, unit_fading=True)
    for d in sc.devices:
        assert d.fading_rho == 1.0
        expect = p.pathloss_c * d.distance_d ** (-p.pathloss_gamma)
        assert d.gain_h == pytest.approx(expect, rel=1e-15)


def test_link_rate_values():
    # P*h/N0 = 3, B = 1  ->  log2(4) = 2
    p = SystemParams(bandwidth_B=1.0, noise_N0=1.0)
    d = Device(id=0, gain_h=3.0, sensing_s=1.0, max_power_P=1.0)
    assert link_rate(d, p) == pytest.approx(2.0)
    # P*h/N0 = 1, B = 1e6  ->  1e6
    p2 = SystemParams(bandwidth_B=1e6, noise_N0=1.0)
    d2 = Device(id=0, gain_h=1.0, sensing_s=1.0, max_power_P=1.0)
    assert link_rate(d2, p2) == pytest.approx(1e6)
    # zero signal limit via tiny gain
    d3 = Device(id=0, gain_h=1e-300, sensing_s=1.0, max_power_P=1.0)
    assert link_rate(d3, p) == pytest.approx(0.0, abs=1e-12)


def test_link_rate_monotonicity():
    p = SystemParams(bandwidth_B=1e6, noise_N0=1e-9)
    rng = np.random.default_rng(0)
    for _ in range(50):
        h = 10 ** rng.uniform(-9, -4)
        d = Device(id=0, gain_h=h, sensing_s=1.0, max_power_P=rng.uniform(0.1, 2))
        base = link_rate(d, p)
        up_h = Device(id=0, gain_h=h * 1.5, sensing_s=1.0, max_power_P=d.max_power_P)
        up_p = Device(id=0, gain_h=h, sensing_s=1.0, max_power_P=d.max_power_P * 1.5)
        assert link_rate(up_h, p) > base
        assert link_rate(up_p, p) > base
        assert link_rate(d, p, interference=1e-9) < base
        noisy = SystemParams(bandwidth_B=1e6, noise_N0=2e-9)
        assert link_rate(d, noisy) < base
    with pytest.raises(ValueError):
        link_rate(d, p, interference=-1.0)


def test_json_round_trip():
    sc = generate_scenario(SystemParams(), 5, (1e5, 1e6), seed=9)
    back = scenario_from_json(scenario_to_json(sc))
    assert scenario_to_json(back) == scenario_to_json(sc)
    assert back.devices[3].gain_h == sc.devices[3].gain_h


def test_validation_errors():
    with pytest.raises(ValueError):
        SystemParams(frame_T=0.0)
    with pytest.raises(ValueError):
        Device(id=0, gain_h=0.0, sensing_s=1.0)
    with pytest.raises(ValueError):
        Device(id=0, gain_h=1.0, sensing_s=-1.0)
    with pytest.raises(ValueError):
        Scenario(system=SystemParams(), devices=[])
    with pytest.raises(ValueError):
        Scenario(system=SystemParams(), devices=[
            Device(id=1, gain_h=1.0, sensing_s=1.0),
            Device(id=1, gain_h=1.0, sensing_s=1.0),
        ])
