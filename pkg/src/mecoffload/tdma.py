"""Synchronous sense-then-offload TDMA solver.

One frame = N offloading slots followed by a single parallel-computing slot.
Given an offloading sequence the optimal time split is an extreme point with
every sensing-causality constraint active, which collapses the whole problem
to per-slot throughput densities mu_i and an O(N) compute split.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, link_rate

EXHAUSTIVE_CAP = 9


@dataclass
class OffloadingSequence:
    """slot_to_device[i] = device offloading in slot i+1."""

    slot_to_device: list[int]

    def __post_init__(self):
        n = len(self.slot_to_device)
        if sorted(self.slot_to_device) != list(range(n)):
            raise ValueError("offloading sequence must be a permutation of 0..N-1")

    def __len__(self):
        return len(self.slot_to_device)

    def __iter__(self):
        return iter(self.slot_to_device)


@dataclass
class TdmaAllocation:
    sequence: list[int]
    sense_t1s: float
    slot_times: np.ndarray          # seconds, slot order
    compute_tc: float
    compute_share: np.ndarray       # bits/s, device order
    offloaded_bits: np.ndarray      # bits, device order
    weighted_throughput: float

    def to_dict(self) -> dict:
        return {
            "sequence": list(self.sequence),
            "sense_t1s": self.sense_t1s,
            "slot_times": list(self.slot_times),
            "compute_tc": self.compute_tc,
            "compute_share": list(self.compute_share),
            "offloaded_bits": list(self.offloaded_bits),
            "weighted_throughput": self.weighted_throughput,
        }


def device_rates(scenario: Scenario) -> np.ndarray:
    """Interference-free peak-power rates, device order."""
    return np.array([link_rate(d, scenario.system) for d in scenario.devices])


def schedule_ascending_weighted_rate(scenario: Scenario) -> OffloadingSequence:
    """Slot i gets the device with the i-th smallest w_n * r_n; ties by id."""
    r = device_rates(scenario)
    w = scenario.weights()
    order = sorted(range(scenario.n_devices), key=lambda n: (w[n] * r[n], n))
    return OffloadingSequence(order)


def closed_form_times(scenario: Scenario, sequence, compute_tc: float):
    """Extreme-point time split for a given sequence and computing time.

    Returns (sense_t1s, slot_times). All sensing-causality constraints and the
    frame budget hold with equality, so sum(slot_times) == T - compute_tc.
    """
    T = scenario.system.frame_T
    if not 0.0 <= compute_tc <= T * (1 + 1e-12):
        raise ValueError("compute_tc outside [0, frame_T]")
    seq = list(sequence)
    n = len(seq)
    s = [scenario.devices[d].sensing_s for d in seq]
    r = [link_rate(scenario.devices[d], scenario.system) for d in seq]
    for si, ri in zip(s, r):
        if si + ri <= 0.0:
            raise ValueError("singular slot: sensing_s + rate == 0")
    rest = T - compute_tc

    # suffix[i] = prod_{j>=i} r_j / (s_j + r_j); suffix[n] = 1 (empty product)
    suffix = [1.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] * (r[i] / (s[i] + r[i]))
    sense_t1s = rest * suffix[0]
    slot_times = np.empty(n)
    slot_times[0] = rest * suffix[1]
    for i in range(1, n):
        slot_times[i] = rest * (s[i] / (s[i] + r[i])) * suffix[i + 1]
    return sense_t1s, slot_times


def slot_data_coefficients(scenario: Scenario, sequence):
    """Per-slot throughput densities: offloaded bits of slot i = (T - tc) * mu[i].

    Returns (mu, lam) with lam = sum(mu).
    """
    seq = list(sequence)
    n = len(seq)
    s = [scenario.devices[d].sensing_s for d in seq]
    r = [link_rate(scenario.devices[d], scenario.system) for d in seq]
    suffix = [1.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] * (r[i] / (s[i] + r[i]))
    mu = np.array([s[i] * suffix[i] for i in range(n)])
    return mu, float(np.sum(mu))


def compute_split(lam: float, mu: np.ndarray, system):
    """Equal-deadline computing split: tc = T*lam/(lam+C), share_i = C*mu_i/lam."""
    T, C = system.frame_T, system.edge_capacity_C
    if lam <= 0.0:
        return 0.0, np.zeros_like(np.asarray(mu, dtype=float))
    tc = T * lam / (lam + C)
    return tc, C * np.asarray(mu, dtype=float) / lam


def solve_tdma(scenario: Scenario, sequence=None) -> TdmaAllocation:
    """Ascending weighted-rate schedule + closed-form time and compute split."""
    if sequence is None:
        sequence = schedule_ascending_weighted_rate(scenario)
    seq = list(sequence)
    mu, lam = slot_data_coefficients(scenario, seq)
    tc, share_by_slot = compute_split(lam, mu, scenario.system)
    sense_t1s, slot_times = closed_form_times(scenario, seq, tc)
    rest = scenario.system.frame_T - tc
    w = scenario.weights()
    n = scenario.n_devices
    offloaded = np.zeros(n)
    shares = np.zeros(n)
    value = 0.0
    for i, dev in enumerate(seq):
        offloaded[dev] = rest * mu[i]
        shares[dev] = share_by_slot[i]
        value += w[dev] * rest * mu[i]
    return TdmaAllocation(sequence=seq, sense_t1s=sense_t1s, slot_times=slot_times,
                          compute_tc=tc, compute_share=shares,
                          offloaded_bits=offloaded, weighted_throughput=value)


def _sequence_value(s, r, w, T, C, seq) -> float:
    """Weighted throughput of a sequence; plain floats for tight search loops."""
    lam = 0.0
    wsum = 0.0
    suffix = 1.0
    for i in range(len(seq) - 1, -1, -1):
        dev = seq[i]
        suffix *= r[dev] / (s[dev] + r[dev])
        mu_i = s[dev] * suffix
        lam += mu_i
        wsum += w[dev] * mu_i
    if lam <= 0.0:
        return 0.0
    return (T - T * lam / (lam + C)) * wsum


def exhaustive_sequence_search(scenario: Scenario, max_n: int = EXHAUSTIVE_CAP):
    """Best sequence over all N! permutations; ties broken lexicographically.

    Returns (OffloadingSequence, TdmaAllocation).
    """
    n = scenario.n_devices
    if n > max_n:
        raise ValueError(f"exhaustive search refused: N={n} exceeds cap {max_n}")
    s = [d.sensing_s for d in scenario.devices]
    r = [link_rate(d, scenario.system) for d in scenario.devices]
    w = [d.weight_w for d in scenario.devices]
    T, C = scenario.system.frame_T, scenario.system.edge_capacity_C
    best_seq, best_val = None, -1.0
    for perm in itertools.permutations(range(n)):
        val = _sequence_value(s, r, w, T, C, perm)
        if val > best_val:
            best_seq, best_val = perm, val
    seq = OffloadingSequence(list(best_seq))
    return seq, solve_tdma(scenario, seq)


def solve_tdma_lp(scenario: Scenario, sequence) -> TdmaAllocation:
    """Exact optimum of the frame problem for a fixed sequence, via LP.

    The all-causality-active closed form is the optimum only for the
    ascending weighted-rate order; benchmark orders (random, sensing-sorted,
    rate-descending) are evaluated exactly here. Substituting z_i = C_i * tc
    linearizes the compute coupling, so the whole problem is one LP over
    (t1s, t_1..t_N, tc, z_1..z_N).
    """
    from . import lp_solver

    seq = list(sequence)
    n = len(seq)
    T, C = scenario.system.frame_T, scenario.system.edge_capacity_C
    s = [scenario.devices[d].sensing_s for d in seq]
    r = [link_rate(scenario.devices[d], scenario.system) for d in seq]
    w = [scenario.devices[d].weight_w for d in seq]
    nv = 1 + n + 1 + n
    tc_ix, z_ix = n + 1, n + 2
    obj = np.zeros(nv)
    obj[0] = -w[0] * r[0]           # slot-1 bits are r1*(t_1 - t1s)
    for i in range(n):
        obj[1 + i] = w[i] * r[i]
    rows = []
    a = np.zeros(nv)
    a[1: tc_ix + 1] = 1.0
    rows.append((a, "<=", T))
    a = np.zeros(nv)
    a[0], a[1] = 1.0, -1.0
    rows.append((a, "<=", 0.0))      # t1s <= t_1
    a = np.zeros(nv)
    a[1], a[0] = r[0], -(r[0] + s[0])
    rows.append((a, "<=", 0.0))      # slot-1 causality
    for i in range(1, n):
        a = np.zeros(nv)
        a[1 + i] = r[i]
        a[1: 1 + i] -= s[i]
        rows.append((a, "<=", 0.0))
    a = np.zeros(nv)
    a[1], a[0], a[z_ix] = r[0], -r[0], -1.0
    rows.append((a, "<=", 0.0))      # slot-1 bits <= z_1
    for i in range(1, n):
        a = np.zeros(nv)
        a[1 + i], a[z_ix + i] = r[i], -1.0
        rows.append((a, "<=", 0.0))
    a = np.zeros(nv)
    a[z_ix:] = 1.0
    a[tc_ix] = -C
    rows.append((a, "<=", 0.0))      # sum z <= C * tc
    sol = lp_solver.solve(lp_solver.LinearProgram(sense="max", objective=obj,
                                                  rows=rows, n_vars=nv))
    if sol.status != lp_solver.OPTIMAL:
        raise RuntimeError(f"fixed-sequence LP ended with status {sol.status!r}")
    x = sol.x
    t1s, times, tc = float(x[0]), np.array(x[1: n + 1]), float(x[tc_ix])
    z = np.array(x[z_ix:])
    offloaded = np.zeros(scenario.n_devices)
    shares = np.zeros(scenario.n_devices)
    offloaded[seq[0]] = r[0] * (times[0] - t1s)
    for i in range(1, n):
        offloaded[seq[i]] = r[i] * times[i]
    if tc > 0:
        for i, dev in enumerate(seq):
            shares[dev] = z[i] / tc
    return TdmaAllocation(sequence=seq, sense_t1s=t1s, slot_times=times,
                          compute_tc=tc, compute_share=shares,
                          offloaded_bits=np.maximum(offloaded, 0.0),
                          weighted_throughput=float(sol.objective_value))


def benchmark_sequence(scenario: Scenario, kind: str, seed: int | None = None) -> OffloadingSequence:
    """Benchmark scheduling orders: 'random', 'ascending_sensing', 'descending_rate'."""
    n = scenario.n_devices
    if kind == "random":
        if seed is None:
            raise ValueError("random benchmark sequence needs a seed")
        rng = np.random.default_rng(seed)
        return OffloadingSequence([int(v) for v in rng.permutation(n)])
    if kind == "ascending_sensing":
        s = scenario.sensing()
        return OffloadingSequence(sorted(range(n), key=lambda i: (s[i], i)))
    if kind == "descending_rate":
        r = device_rates(scenario)
        return OffloadingSequence(sorted(range(n), key=lambda i: (-r[i], i)))
    raise ValueError(f"unknown benchmark sequence kind {kind!r}")
