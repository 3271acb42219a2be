import numpy as np

from mecoffload.scenario import Device, Scenario, SystemParams


def rate_scenario(rates, sensing, weights=None, T=1.0, C=3.0, B=1.0, N0=1.0):
    """Scenario whose interference-free link rates are exactly `rates`.

    Uses B and N0 so that gain = 2^(r/B) - 1 at unit power.
    """
    rates = list(rates)
    sensing = list(sensing)
    weights = list(weights) if weights is not None else [1.0] * len(rates)
    system = SystemParams(frame_T=T, bandwidth_B=B, noise_N0=N0, edge_capacity_C=C)
    devices = [
        Device(id=i, gain_h=(2.0 ** (rates[i] / B) - 1.0) * N0, sensing_s=sensing[i],
               max_power_P=1.0, weight_w=weights[i])
        for i in range(len(rates))
    ]
    return Scenario(system=system, devices=devices)


def paper_scenario(n, seed, s_range=(1e5, 1e6), **park):
    from mecoffload.scenario import generate_scenario
    return generate_scenario(SystemParams(), n, s_range, seed, **park)


def rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)
