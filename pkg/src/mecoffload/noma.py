"""Fixed-SIC NOMA solver.

All devices sense for t_s, offload simultaneously for t_o, then the server
computes for t_c. Decoding follows descending channel gain. Per-device power
control matches offloaded data to sensed data exactly, which turns the whole
problem into a one-dimensional search over beta = t_s/t_o: each device has a
largest ratio beta_n* it can support at its power cap, and the frame splits
in closed form at beta* = min_n beta_n*.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import Scenario

LOG2 = np.log(2.0)
BRACKET_CAP = 2.0 ** 60


@dataclass
class NomaAllocation:
    sense_ts: float
    offload_to: float
    compute_tc: float
    beta_star: float
    power: np.ndarray           # watts, device order
    rates: np.ndarray           # bits/s, device order
    compute_share: np.ndarray   # bits/s, device order
    throughput: float

    def to_dict(self) -> dict:
        return {
            "sense_ts": self.sense_ts,
            "offload_to": self.offload_to,
            "compute_tc": self.compute_tc,
            "beta_star": self.beta_star,
            "power": list(self.power),
            "rates": list(self.rates),
            "compute_share": list(self.compute_share),
            "throughput": self.throughput,
        }


def sic_order(scenario: Scenario) -> list[int]:
    """Decode order: descending gain, ties by device id."""
    return sorted(range(scenario.n_devices),
                  key=lambda n: (-scenario.devices[n].gain_h, n))


def power_for_ratio(scenario: Scenario, beta: float) -> np.ndarray:
    """Transmit powers that make every device offload exactly what it senses
    when t_s/t_o = beta. Device order, watts."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    order = sic_order(scenario)
    B = scenario.system.bandwidth_B
    N0 = scenario.system.noise_N0
    power = np.zeros(scenario.n_devices)
    # exponent of the interference term: sum of s_k*beta/B over devices decoded later
    tail = 0.0
    for n in reversed(order):
        dev = scenario.devices[n]
        e_own = dev.sensing_s * beta / B
        power[n] = (N0 / dev.gain_h) * (2.0 ** e_own - 1.0) * (2.0 ** tail)
        tail += e_own
    return power


def sic_rates(scenario: Scenario, power: np.ndarray) -> np.ndarray:
    """Uplink rates under descending-gain SIC for given powers. Device order."""
    power = np.asarray(power, dtype=float)
    if np.any(power < 0):
        raise ValueError("powers must be >= 0")
    order = sic_order(scenario)
    B = scenario.system.bandwidth_B
    N0 = scenario.system.noise_N0
    rates = np.zeros(scenario.n_devices)
    interference = 0.0
    for n in reversed(order):
        dev = scenario.devices[n]
        sig = power[n] * dev.gain_h
        rates[n] = B * np.log2(1.0 + sig / (N0 + interference))
        interference += sig
    return rates


def _power_cap_margin_log(scenario: Scenario, n: int, beta: float, tail_s: float) -> float:
    """log2(P_cap) - log2(P_n(beta)); positive while beta is supportable.

    Evaluated in log space so that huge exponents cannot overflow.
    tail_s is the sum of sensing rates of devices decoded after n.
    """
    dev = scenario.devices[n]
    B = scenario.system.bandwidth_B
    N0 = scenario.system.noise_N0
    e_own = dev.sensing_s * beta / B
    if e_own <= 0.0:
        return np.inf
    # log2(2^e - 1) = e + log2(1 - 2^-e), stable for both tiny and huge e
    if e_own > 50.0:
        log_grow = e_own
    else:
        log_grow = e_own + np.log1p(-(2.0 ** (-e_own))) / LOG2
    log_power = np.log2(N0 / dev.gain_h) + log_grow + tail_s * beta / B
    return np.log2(dev.max_power_P) - log_power


def solve_beta_n(scenario: Scenario, n: int, tolerance: float | None = None) -> float:
    """Largest sensing/offloading ratio device n can support at its power cap.

    Root of P_n(beta) = P_cap via bracket doubling from beta = 1 and bisection.
    Default tolerance is 1e-9 times the found upper bracket.
    """
    order = sic_order(scenario)
    pos = order.index(n)
    tail_s = float(sum(scenario.devices[k].sensing_s for k in order[pos + 1:]))

    hi = 1.0
    while _power_cap_margin_log(scenario, n, hi, tail_s) > 0.0:
        hi *= 2.0
        if hi > BRACKET_CAP:
            raise ArithmeticError("beta bracket exceeded 2^60; parameters not sane")
    lo = 0.0
    # Relative width keeps the implied power error ~1e-9 even for tiny roots,
    # where the power's log-derivative grows like 1/beta.
    while hi - lo > (tolerance if tolerance is not None else 1e-9 * hi):
        mid = 0.5 * (lo + hi)
        if _power_cap_margin_log(scenario, n, mid, tail_s) > 0.0:
            lo = mid
        else:
            hi = mid
    # lo is the last ratio verified to stay below the power cap
    if not np.isfinite(lo):
        raise ArithmeticError("beta search produced a non-finite value")
    return lo


def solve_noma(scenario: Scenario, tolerance: float | None = None) -> NomaAllocation:
    """Closed-form optimal frame split at beta* = min_n beta_n*."""
    betas = [solve_beta_n(scenario, n, tolerance) for n in range(scenario.n_devices)]
    beta_star = min(betas)
    power = power_for_ratio(scenario, beta_star)
    rates = sic_rates(scenario, power)
    C = scenario.system.edge_capacity_C
    T = scenario.system.frame_T
    rate_sum = float(np.sum(rates))
    ts = T / (1.0 + 1.0 / beta_star + rate_sum / (C * beta_star))
    to = ts / beta_star
    tc = ts * rate_sum / (C * beta_star)
    shares = C * rates / rate_sum if rate_sum > 0 else np.zeros_like(rates)
    throughput = float(np.sum(scenario.sensing()) * ts)
    return NomaAllocation(sense_ts=ts, offload_to=to, compute_tc=tc,
                          beta_star=beta_star, power=power, rates=rates,
                          compute_share=shares, throughput=throughput)
