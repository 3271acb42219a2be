"""Asynchronous-computing TDMA solver.

Each device's data is computed as soon as its offloading slot ends, so the
compute constraint couples the share C_{n_i} with the remaining frame time.
The bilinear products are McCormick-relaxed to an LP whose compute shares are
then frozen for a second, exact LP over the time split alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import lp_solver
from .lp_solver import LinearProgram
from .scenario import Scenario, link_rate
from .tdma import schedule_ascending_weighted_rate, solve_tdma

log = logging.getLogger(__name__)

SHARE_FLOOR_FRACTION = 1e-6


class AsyncSolveError(RuntimeError):
    """An LP stage did not return an optimal solution."""

    def __init__(self, stage: str, status: str):
        super().__init__(f"async solver {stage} LP ended with status {status!r}")
        self.stage = stage
        self.status = status


@dataclass
class AsyncAllocation:
    sequence: list[int]
    times: np.ndarray               # t_0 .. t_{N+1}; t_0 sensing, t_{N+1} trailing compute
    compute_share: np.ndarray       # bits/s, device order
    offloaded_bits: np.ndarray      # bits, device order
    weighted_throughput: float
    relaxation_bound: float

    def to_dict(self) -> dict:
        return {
            "sequence": list(self.sequence),
            "times": list(self.times),
            "compute_share": list(self.compute_share),
            "offloaded_bits": list(self.offloaded_bits),
            "weighted_throughput": self.weighted_throughput,
            "relaxation_bound": self.relaxation_bound,
        }


def _seq_params(scenario: Scenario, sequence):
    seq = list(sequence)
    s = np.array([scenario.devices[d].sensing_s for d in seq])
    r = np.array([link_rate(scenario.devices[d], scenario.system) for d in seq])
    w = np.array([scenario.devices[d].weight_w for d in seq])
    return seq, s, r, w


def build_relaxed_lp(scenario: Scenario, sequence) -> LinearProgram:
    """McCormick-relaxed LP over (t_0..t_{N+1}, C_{n_1}..C_{n_N}, l_1..l_N).

    l_i stands in for the product C_{n_i} * sum_{k>i} t_k with envelope bounds
    C_{n_i} in [0, C] and remaining time in [0, T].
    """
    seq, s, r, w = _seq_params(scenario, sequence)
    n = len(seq)
    T, C = scenario.system.frame_T, scenario.system.edge_capacity_C
    nv = (n + 2) + n + n
    t0, c0, l0 = 0, n + 2, 2 * n + 2

    obj = np.zeros(nv)
    obj[t0 + 1: t0 + 1 + n] = w * r

    rows = []
    budget = np.zeros(nv)
    budget[t0: t0 + n + 2] = 1.0
    rows.append((budget, "<=", T))
    for i in range(1, n + 1):
        # sensing causality: r_i t_i <= s_i * (t_0 + ... + t_{i-1})
        a = np.zeros(nv)
        a[t0 + i] = r[i - 1]
        a[t0: t0 + i] -= s[i - 1]
        rows.append((a, "<=", 0.0))
        # link to the relaxed product: r_i t_i <= l_i
        a = np.zeros(nv)
        a[t0 + i] = r[i - 1]
        a[l0 + i - 1] = -1.0
        rows.append((a, "<=", 0.0))
        # McCormick envelope of l_i = C_{n_i} * sum_{k>i} t_k
        a = np.zeros(nv)
        a[l0 + i - 1] = -1.0
        rows.append((a, "<=", 0.0))                      # l_i >= 0
        a = np.zeros(nv)
        a[l0 + i - 1] = -1.0
        a[t0 + i + 1: t0 + n + 2] = C
        a[c0 + i - 1] = T
        rows.append((a, "<=", C * T))                    # l_i >= C*rem + T*C_i - C*T
        a = np.zeros(nv)
        a[l0 + i - 1] = 1.0
        a[t0 + i + 1: t0 + n + 2] = -C
        rows.append((a, "<=", 0.0))                      # l_i <= C*rem
        a = np.zeros(nv)
        a[l0 + i - 1] = 1.0
        a[c0 + i - 1] = -T
        rows.append((a, "<=", 0.0))                      # l_i <= T*C_i
    a = np.zeros(nv)
    a[c0: c0 + n] = 1.0
    rows.append((a, "<=", C))
    return LinearProgram(sense="max", objective=obj, rows=rows, n_vars=nv)


def build_time_lp(scenario: Scenario, sequence, shares_by_slot) -> LinearProgram:
    """Original async problem with the compute shares fixed: LP in the times."""
    seq, s, r, w = _seq_params(scenario, sequence)
    n = len(seq)
    T = scenario.system.frame_T
    nv = n + 2
    obj = np.zeros(nv)
    obj[1: 1 + n] = w * r
    rows = [(np.ones(nv), "<=", T)]
    for i in range(1, n + 1):
        a = np.zeros(nv)
        a[i] = r[i - 1]
        a[:i] -= s[i - 1]
        rows.append((a, "<=", 0.0))
        a = np.zeros(nv)
        a[i] = r[i - 1]
        a[i + 1:] -= shares_by_slot[i - 1]
        rows.append((a, "<=", 0.0))
    return LinearProgram(sense="max", objective=obj, rows=rows, n_vars=nv)


def solve_async(scenario: Scenario, sequence=None) -> AsyncAllocation:
    """Two-stage solve: relaxed LP fixes the compute split, exact LP the times.

    Zero shares handed to offloading-capable devices by the relaxation are
    floored at 1e-6*C, and the split is rescaled to use the full capacity
    (enlarging shares only relaxes the second stage).
    """
    if sequence is None:
        sequence = schedule_ascending_weighted_rate(scenario)
    seq, s, r, w = _seq_params(scenario, sequence)
    n = len(seq)
    C = scenario.system.edge_capacity_C

    relaxed = lp_solver.solve(build_relaxed_lp(scenario, seq))
    if relaxed.status != lp_solver.OPTIMAL:
        raise AsyncSolveError("relaxation", relaxed.status)
    bound = relaxed.objective_value
    shares = np.array(relaxed.x[n + 2: 2 * n + 2])

    floored = (shares < SHARE_FLOOR_FRACTION * C) & (r > 0)
    if np.any(floored):
        log.warning("async relaxation returned %d near-zero compute shares; flooring",
                    int(np.sum(floored)))
        shares = np.where(floored, SHARE_FLOOR_FRACTION * C, shares)
    total = float(np.sum(shares))
    if total > 0:
        shares = shares * (C / total)

    final = lp_solver.solve(build_time_lp(scenario, seq, shares))
    if final.status != lp_solver.OPTIMAL:
        raise AsyncSolveError("time-split", final.status)

    # The relaxation leaves the shares degenerate (they are absent from its
    # objective), so a vertex split can lose to the synchronous schedule. The
    # synchronous split always admits the synchronous times in stage two, so
    # re-running with it restores the dominance async >= sync.
    sync = solve_tdma(scenario, seq)
    if final.objective_value < sync.weighted_throughput:
        log.info("async stage-2 value below synchronous; retrying with the "
                 "synchronous compute split")
        sync_shares = np.array([sync.compute_share[d] for d in seq])
        retry = lp_solver.solve(build_time_lp(scenario, seq, sync_shares))
        if retry.status == lp_solver.OPTIMAL and \
                retry.objective_value > final.objective_value:
            final, shares = retry, sync_shares

    times = np.array(final.x)
    offl = np.zeros(scenario.n_devices)
    share_dev = np.zeros(scenario.n_devices)
    for i, dev in enumerate(seq):
        offl[dev] = r[i] * times[1 + i]
        share_dev[dev] = shares[i]
    return AsyncAllocation(sequence=seq, times=times, compute_share=share_dev,
                           offloaded_bits=offl,
                           weighted_throughput=final.objective_value,
                           relaxation_bound=bound)
