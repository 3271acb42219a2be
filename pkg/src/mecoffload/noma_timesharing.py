"""Time-sharing NOMA solver for identical sensing rates.

The offloading window is split into fractions, each decoded under its own SIC
order at full transmit power. Fractions reshape per-device rates without
changing the sum rate, so the frame split reduces to an LP after substituting
y_m = tau_m * t_o and z_n = C_n * t_c.

The throughput of an order set is a strictly increasing transform of the
maximin effective rate max_tau min_n sum_m tau_m r_{n,m}; the greedy set
builder scores candidates through that smaller LP.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import lp_solver
from .lp_solver import LinearProgram
from .noma import power_for_ratio, sic_order, solve_beta_n
from .scenario import Scenario


@dataclass
class SicOrder:
    """decode_position[n] = decode slot of device n (0 decoded first)."""

    decode_position: list[int]

    def __post_init__(self):
        n = len(self.decode_position)
        if sorted(self.decode_position) != list(range(n)):
            raise ValueError("decode_position must be a permutation of 0..N-1")

    @classmethod
    def from_decode_sequence(cls, seq) -> "SicOrder":
        pos = [0] * len(seq)
        for slot, dev in enumerate(seq):
            pos[dev] = slot
        return cls(pos)

    def decode_sequence(self) -> list[int]:
        seq = [0] * len(self.decode_position)
        for dev, slot in enumerate(self.decode_position):
            seq[slot] = dev
        return seq

    def key(self):
        return tuple(self.decode_position)


@dataclass
class TimeSharingAllocation:
    sense_ts: float
    offload_to: float
    compute_tc: float
    fractions: np.ndarray       # tau_m per order
    compute_share: np.ndarray   # bits/s, device order
    throughput: float
    orders: list[SicOrder]

    def to_dict(self) -> dict:
        return {
            "sense_ts": self.sense_ts,
            "offload_to": self.offload_to,
            "compute_tc": self.compute_tc,
            "fractions": list(self.fractions),
            "compute_share": list(self.compute_share),
            "throughput": self.throughput,
            "orders": [o.decode_sequence() for o in self.orders],
        }


def _require_equal_sensing(scenario: Scenario) -> float:
    s0 = scenario.devices[0].sensing_s
    if any(d.sensing_s != s0 for d in scenario.devices):
        raise ValueError("time-sharing NOMA requires identical sensing rates")
    return s0


def descending_gain_order(scenario: Scenario) -> SicOrder:
    return SicOrder.from_decode_sequence(sic_order(scenario))


def _rate_column(scenario: Scenario, order: SicOrder) -> np.ndarray:
    """Full-power SIC rates under one decode order, device order."""
    B = scenario.system.bandwidth_B
    N0 = scenario.system.noise_N0
    ph = scenario.powers() * scenario.gains()
    seq = order.decode_sequence()
    rates = np.zeros(scenario.n_devices)
    interference = 0.0
    for dev in reversed(seq):
        rates[dev] = B * np.log2(1.0 + ph[dev] / (N0 + interference))
        interference += ph[dev]
    return rates


def rate_matrix(scenario: Scenario, orders) -> np.ndarray:
    """N x M matrix of full-power rates, one column per SIC order."""
    return np.column_stack([_rate_column(scenario, o) for o in orders])


def full_power_sum_rate(scenario: Scenario) -> float:
    ph = float(np.sum(scenario.powers() * scenario.gains()))
    return scenario.system.bandwidth_B * np.log2(1.0 + ph / scenario.system.noise_N0)


def build_p21_lp(scenario: Scenario, orders) -> LinearProgram:
    """Substituted frame-split LP over (t_s, t_c, y_1..y_M, z_1..z_N).

    z_n covers the device's useful offloaded data, which equals its sensed
    data s0*t_s: a device stops transmitting once its sensed data is through,
    so compute is never pinned to the full-rate product. (With that product
    the fixed-SIC scheme would provably beat time sharing whenever the
    power-cap-binding device decodes last, inverting the intended dominance.)
    """
    s0 = _require_equal_sensing(scenario)
    R = rate_matrix(scenario, orders)
    n, m = R.shape
    T, C = scenario.system.frame_T, scenario.system.edge_capacity_C
    nv = 2 + m + n
    obj = np.zeros(nv)
    obj[0] = n * s0

    rows = []
    budget = np.zeros(nv)
    budget[0] = 1.0
    budget[1] = 1.0
    budget[2: 2 + m] = 1.0
    rows.append((budget, "<=", T))
    for i in range(n):
        a = np.zeros(nv)
        a[0] = s0
        a[2: 2 + m] = -R[i]
        rows.append((a, "<=", 0.0))        # sensed <= transmittable
        a = np.zeros(nv)
        a[0] = s0
        a[2 + m + i] = -1.0
        rows.append((a, "<=", 0.0))        # sensed <= computed share z_i
    a = np.zeros(nv)
    a[1] = -C
    a[2 + m:] = 1.0
    rows.append((a, "<=", 0.0))            # sum z <= C * t_c
    return LinearProgram(sense="max", objective=obj, rows=rows, n_vars=nv)


def _maximin_rate(R: np.ndarray):
    """max_tau min_n (R @ tau)_n over the simplex; returns (rho, tau)."""
    n, m = R.shape
    nv = 1 + m
    obj = np.zeros(nv)
    obj[0] = 1.0
    rows = []
    for i in range(n):
        a = np.zeros(nv)
        a[0] = 1.0
        a[1:] = -R[i]
        rows.append((a, "<=", 0.0))
    ones = np.zeros(nv)
    ones[1:] = 1.0
    rows.append((ones, "=", 1.0))
    sol = lp_solver.solve(LinearProgram(sense="max", objective=obj, rows=rows, n_vars=nv))
    if sol.status != lp_solver.OPTIMAL:
        raise RuntimeError(f"maximin rate LP ended with status {sol.status!r}")
    return float(sol.x[0]), np.array(sol.x[1:])


def _value_from_min_rate(scenario: Scenario, rho: float) -> float:
    """Frame throughput achieved when the binding effective rate is rho."""
    s0 = _require_equal_sensing(scenario)
    n = scenario.n_devices
    T, C = scenario.system.frame_T, scenario.system.edge_capacity_C
    if rho <= 0:
        return 0.0
    return n * s0 * T / (1.0 + s0 / rho + n * s0 / C)


def _neighbor_orders(order: SicOrder):
    seq = order.decode_sequence()
    for j in range(len(seq) - 1):
        swapped = list(seq)
        swapped[j], swapped[j + 1] = swapped[j + 1], swapped[j]
        yield SicOrder.from_decode_sequence(swapped)


def _moved_last(order: SicOrder, dev: int) -> SicOrder:
    seq = [d for d in order.decode_sequence() if d != dev]
    seq.append(dev)
    return SicOrder.from_decode_sequence(seq)


def greedy_sic_set(scenario: Scenario, max_orders: int | None = None) -> list[SicOrder]:
    """Grow the order set from descending-gain, adding whichever candidate
    raises the frame throughput most; stop below 1e-9 relative improvement.

    Candidates are all N! orders for N <= 6; for larger N the adjacent-swap
    neighbors of the newest order plus, for every device currently pinning
    the min effective rate, each member order with that device moved to the
    interference-free last decode slot.
    """
    _require_equal_sensing(scenario)
    n = scenario.n_devices
    if max_orders is None:
        max_orders = 2 * n
    base = descending_gain_order(scenario)
    if n == 1:
        return [base]

    columns = {base.key(): _rate_column(scenario, base)}
    chosen = [base]
    R = columns[base.key()][:, None]
    rho, tau = _maximin_rate(R)
    value = _value_from_min_rate(scenario, rho)
    rho_cap = full_power_sum_rate(scenario) / n  # best possible effective rate

    if n <= 6:
        pool = [SicOrder.from_decode_sequence(p)
                for p in itertools.permutations(range(n))]
    else:
        pool = None

    while len(chosen) < max_orders and rho < rho_cap * (1.0 - 1e-9):
        if pool is not None:
            candidates = pool
        else:
            candidates = []
            seen = set()
            for cand in _neighbor_orders(chosen[-1]):
                if cand.key() not in seen:
                    seen.add(cand.key())
                    candidates.append(cand)
            effective = R @ tau
            binding = [d for d in range(n)
                       if effective[d] <= rho * (1.0 + 1e-6) + 1e-12]
            for dev in binding:
                for member in chosen:
                    cand = _moved_last(member, dev)
                    if cand.key() not in seen:
                        seen.add(cand.key())
                        candidates.append(cand)
        member_keys = {o.key() for o in chosen}
        best = None
        for cand in candidates:
            if cand.key() in member_keys:
                continue
            col = columns.get(cand.key())
            if col is None:
                col = _rate_column(scenario, cand)
                columns[cand.key()] = col
            rho_c, tau_c = _maximin_rate(np.column_stack([R, col]))
            if best is None or rho_c > best[0] + 1e-15:
                best = (rho_c, cand, tau_c)
        if best is None:
            break
        new_value = _value_from_min_rate(scenario, best[0])
        if new_value <= value * (1.0 + 1e-9):
            break
        chosen.append(best[1])
        R = np.column_stack([R, columns[best[1].key()]])
        rho, tau, value = best[0], best[2], new_value
    return chosen


def solve_timesharing(scenario: Scenario, orders=None) -> TimeSharingAllocation:
    """Solve the substituted LP for the given (default greedy) order set."""
    s0 = _require_equal_sensing(scenario)
    if orders is None:
        orders = greedy_sic_set(scenario)
    orders = list(orders)
    lp = build_p21_lp(scenario, orders)
    sol = lp_solver.solve(lp)
    if sol.status != lp_solver.OPTIMAL:
        raise RuntimeError(f"time-sharing LP ended with status {sol.status!r}")
    n, m = scenario.n_devices, len(orders)
    ts, tc = float(sol.x[0]), float(sol.x[1])
    y = np.array(sol.x[2: 2 + m])
    z = np.array(sol.x[2 + m:])
    to = float(np.sum(y))
    if to > 0:
        fractions = y / to
    else:
        fractions = np.zeros(m)
        fractions[0] = 1.0
    if tc > 0:
        shares = z / tc
    else:
        shares = np.full(n, scenario.system.edge_capacity_C / n)
    return TimeSharingAllocation(sense_ts=ts, offload_to=to, compute_tc=tc,
                                 fractions=fractions, compute_share=shares,
                                 throughput=float(sol.objective_value),
                                 orders=orders)


def closed_form_fixed(scenario: Scenario) -> float:
    """Fixed-SIC throughput in closed form from the power-controlled sum rate."""
    s0 = _require_equal_sensing(scenario)
    n = scenario.n_devices
    T, C = scenario.system.frame_T, scenario.system.edge_capacity_C
    beta_star = min(solve_beta_n(scenario, k) for k in range(n))
    power = power_for_ratio(scenario, beta_star)
    ph = float(np.sum(power * scenario.gains()))
    rsum = scenario.system.bandwidth_B * np.log2(1.0 + ph / scenario.system.noise_N0)
    return n * s0 * T / (1.0 + n * s0 / rsum + n * s0 / C)


def closed_form_sharing_prime(scenario: Scenario) -> float:
    """Time-sharing throughput when every device reaches the same effective
    rate: the fixed-SIC form with full instead of power-controlled powers."""
    s0 = _require_equal_sensing(scenario)
    n = scenario.n_devices
    T, C = scenario.system.frame_T, scenario.system.edge_capacity_C
    rsum = full_power_sum_rate(scenario)
    return n * s0 * T / (1.0 + n * s0 / rsum + n * s0 / C)
