"""Monte Carlo experiment harness.

Runs scheme comparisons over seeded random scenarios: device-count, sensing,
and capacity sweeps, with per-row throughput, Jain fairness, and runtime.
Per-trial seeds derive from (master seed, sweep value, trial), so any row can
be regenerated in isolation and trials parallelize over a process pool.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .fdma import solve_fdma
from .noma import solve_noma
from .noma_timesharing import solve_timesharing
from .scenario import Scenario, SystemParams, generate_scenario
from .tdma import (benchmark_sequence, exhaustive_sequence_search, solve_tdma,
                   solve_tdma_lp)
from .tdma_async import solve_async

log = logging.getLogger(__name__)

SCHEMES = ("tdma", "tdma_exhaustive", "tdma_random", "tdma_asc_s", "tdma_desc_r",
           "tdma_async", "noma_fixed", "noma_timesharing", "fdma")
SWEEP_KINDS = ("device_count", "sensing_max", "capacity")

EXHAUSTIVE_SCHEME_CAP = 8

CSV_COLUMNS = ("scheme", "sweep_value", "trial", "sum_throughput_bits", "jfi",
               "runtime_ms", "seed_used", "failed")


@dataclass
class ExperimentConfig:
    sweep_kind: str
    sweep_values: list
    schemes: list = field(default_factory=lambda: ["tdma", "noma_fixed", "fdma"])
    system: SystemParams = field(default_factory=SystemParams)
    trial_count: int = 500
    seed: int = 1
    n_devices: int = 8
    sensing_range: tuple = (1e5, 1e6)
    equal_sensing: float | None = None
    fdma_time_tol: float = 1e-3
    fdma_tangents: int = 16
    fdma_seed_grid: int = 12

    def validate(self):
        if self.sweep_kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.sweep_kind!r}")
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")
        if not self.schemes:
            raise ValueError("schemes must be nonempty")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")
        if self.trial_count < 1:
            raise ValueError("trial_count must be >= 1")
        if "noma_timesharing" in self.schemes and self.equal_sensing is None:
            raise ValueError("noma_timesharing requires --equal-sensing")
        if self.equal_sensing is not None and self.equal_sensing <= 0:
            raise ValueError("equal_sensing must be positive")
        return self


@dataclass
class ExperimentRow:
    scheme: str
    sweep_value: float
    trial: int
    sum_throughput_bits: float
    jfi: float | None
    runtime_ms: float
    seed_used: int
    failed: bool = False


def jain_index(per_device_bits) -> float | None:
    """(sum x)^2 / (N * sum x^2); None when everything is zero."""
    x = np.asarray(per_device_bits, dtype=float)
    if np.any(x < 0):
        raise ValueError("per-device bits must be nonnegative")
    total_sq = float(np.sum(x)) ** 2
    denom = len(x) * float(np.sum(x * x))
    if denom == 0.0:
        return None
    return total_sq / denom


def derive_seed(master: int, sweep_value: float, trial: int) -> int:
    value_bits = struct.unpack("<Q", struct.pack("<d", float(sweep_value)))[0]
    ss = np.random.SeedSequence([int(master), value_bits, int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def scenario_for(config: ExperimentConfig, sweep_value: float, trial: int) -> Scenario:
    seed = derive_seed(config.seed, sweep_value, trial)
    system = config.system
    n = config.n_devices
    s_range = config.sensing_range
    if config.equal_sensing is not None:
        s_range = (config.equal_sensing, config.equal_sensing)
    if config.sweep_kind == "device_count":
        n = int(sweep_value)
    elif config.sweep_kind == "sensing_max":
        s_range = (s_range[0], float(sweep_value))
    elif config.sweep_kind == "capacity":
        system = replace(system, edge_capacity_C=float(sweep_value))
    return generate_scenario(system, n, s_range, seed)


def _run_scheme(scheme: str, scenario: Scenario, config: ExperimentConfig,
                trial_seed: int):
    """Returns (sum_throughput_bits, per_device_bits) for one scheme."""
    if scheme == "tdma":
        out = solve_tdma(scenario)
        return out.weighted_throughput, out.offloaded_bits
    if scheme == "tdma_exhaustive":
        _, out = exhaustive_sequence_search(scenario, max_n=EXHAUSTIVE_SCHEME_CAP)
        return out.weighted_throughput, out.offloaded_bits
    if scheme == "tdma_random":
        seq = benchmark_sequence(scenario, "random", seed=trial_seed ^ 0x5EED)
        out = solve_tdma_lp(scenario, seq)
        return out.weighted_throughput, out.offloaded_bits
    if scheme == "tdma_asc_s":
        out = solve_tdma_lp(scenario, benchmark_sequence(scenario, "ascending_sensing"))
        return out.weighted_throughput, out.offloaded_bits
    if scheme == "tdma_desc_r":
        out = solve_tdma_lp(scenario, benchmark_sequence(scenario, "descending_rate"))
        return out.weighted_throughput, out.offloaded_bits
    if scheme == "tdma_async":
        out = solve_async(scenario)
        return out.weighted_throughput, out.offloaded_bits
    if scheme == "noma_fixed":
        out = solve_noma(scenario)
        return out.throughput, out.rates * out.offload_to
    if scheme == "noma_timesharing":
        out = solve_timesharing(scenario)
        per_dev = np.full(scenario.n_devices,
                          scenario.devices[0].sensing_s * out.sense_ts)
        return out.throughput, per_dev
    if scheme == "fdma":
        out = solve_fdma(scenario, time_tol=config.fdma_time_tol,
                         tangent_count=config.fdma_tangents,
                         seed_grid=config.fdma_seed_grid)
        return out.total, out.bits_l
    raise ValueError(f"unknown scheme {scheme!r}")


def run_trial(config: ExperimentConfig, sweep_value: float, trial: int) -> list[ExperimentRow]:
    """All schemes on one shared scenario; failures become flagged rows."""
    seed = derive_seed(config.seed, sweep_value, trial)
    scenario = scenario_for(config, sweep_value, trial)
    rows = []
    for scheme in config.schemes:
        if scheme == "tdma_exhaustive" and scenario.n_devices > EXHAUSTIVE_SCHEME_CAP:
            log.warning("tdma_exhaustive disabled at N=%d (cap %d)",
                        scenario.n_devices, EXHAUSTIVE_SCHEME_CAP)
            continue
        t0 = time.perf_counter()
        try:
            throughput, per_dev = _run_scheme(scheme, scenario, config, seed)
            jfi = jain_index(np.maximum(per_dev, 0.0))
            failed = False
        except Exception:
            log.exception("scheme %s failed on sweep=%s trial=%d",
                          scheme, sweep_value, trial)
            throughput, jfi, failed = math.nan, None, True
        ms = (time.perf_counter() - t0) * 1e3
        rows.append(ExperimentRow(scheme=scheme, sweep_value=float(sweep_value),
                                  trial=trial, sum_throughput_bits=float(throughput),
                                  jfi=jfi, runtime_ms=ms, seed_used=seed,
                                  failed=failed))
    return rows


def _pool_task(args):
    config, sweep_value, trial = args
    return run_trial(config, sweep_value, trial)


def run_sweep(config: ExperimentConfig, workers: int = 1) -> list[ExperimentRow]:
    config.validate()
    tasks = [(config, v, t) for v in config.sweep_values
             for t in range(config.trial_count)]
    if workers <= 1:
        results = [_pool_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pool_task, tasks, chunksize=8))
    rows = [row for chunk in results for row in chunk]
    rows.sort(key=lambda r: (r.scheme, r.sweep_value, r.trial))
    return rows


def summarize(rows) -> dict:
    """Means per (scheme, sweep_value), failures excluded but counted."""
    if not rows:
        raise ValueError("no rows to summarize")
    cells = {}
    for r in sorted(rows, key=lambda r: (r.scheme, r.sweep_value, r.trial)):
        cell = cells.setdefault((r.scheme, r.sweep_value),
                                {"throughputs": [], "jfis": [], "failed": 0})
        if r.failed:
            cell["failed"] += 1
        else:
            cell["throughputs"].append(r.sum_throughput_bits)
            if r.jfi is not None:
                cell["jfis"].append(r.jfi)
    out = {}
    for key, cell in cells.items():
        ok = len(cell["throughputs"])
        out[key] = {
            "count": ok,
            "failed": cell["failed"],
            "mean_throughput": float(np.mean(cell["throughputs"])) if ok else None,
            "mean_jfi": float(np.mean(cell["jfis"])) if cell["jfis"] else None,
        }
    return out


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            r.scheme,
            repr(float(r.sweep_value)),
            r.trial,
            repr(float(r.sum_throughput_bits)),
            "" if r.jfi is None else repr(float(r.jfi)),
            f"{r.runtime_ms:.3f}",
            r.seed_used,
            int(r.failed),
        ])
    return buf.getvalue()


def write_csv(rows, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv(rows))
