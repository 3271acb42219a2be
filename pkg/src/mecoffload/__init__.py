"""Joint sensing-offloading-computing allocation for multi-device MEC frames.

Solvers for TDMA (synchronous and asynchronous computing), fixed-SIC NOMA,
time-sharing NOMA, and an FDMA benchmark, plus a Monte Carlo experiment
harness with a CLI.
"""

from .scenario import (Device, Scenario, SystemParams, generate_scenario,
                       link_rate, scenario_from_dict, scenario_from_json,
                       scenario_to_dict, scenario_to_json)

__all__ = [
    "Device",
    "Scenario",
    "SystemParams",
    "generate_scenario",
    "link_rate",
    "scenario_from_dict",
    "scenario_from_json",
    "scenario_to_dict",
    "scenario_to_json",
    "solve_tdma",
    "solve_async",
    "solve_noma",
    "solve_timesharing",
    "solve_fdma",
]


def __getattr__(name):
    # solver entry points are imported lazily so `import mecoffload` stays light
    if name == "solve_tdma":
        from .tdma import solve_tdma
        return solve_tdma
    if name == "solve_async":
        from .tdma_async import solve_async
        return solve_async
    if name == "solve_noma":
        from .noma import solve_noma
        return solve_noma
    if name == "solve_timesharing":
        from .noma_timesharing import solve_timesharing
        return solve_timesharing
    if name == "solve_fdma":
        from .fdma import solve_fdma
        return solve_fdma
    raise AttributeError(name)
