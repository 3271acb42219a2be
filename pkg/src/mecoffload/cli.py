"""Command-line experiment runner.

Subcommands mirror the comparative experiments: device-count sweep, sensing
sweep, capacity sweep, fairness report, and a single-scenario solve that
dumps every allocation as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys

from .fdma import solve_fdma
from .harness import (SCHEMES, ExperimentConfig, run_sweep, summarize,
                      write_csv)
from .noma import solve_noma
from .noma_timesharing import solve_timesharing
from .scenario import SystemParams, generate_scenario, scenario_to_dict
from .tdma import exhaustive_sequence_search, solve_tdma
from .tdma_async import solve_async

DEFAULT_N_GRID = [4, 8, 12, 16, 20, 24]
DEFAULT_SENSING_GRID = [3e5, 8e5, 13e5, 18e5, 23e5]
DEFAULT_CAPACITY_GRID = [0.25e7, 0.5e7, 1e7, 2e7, 4e7]


def _add_common(p):
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--schemes", type=str, default=None,
                   help=f"comma list from {','.join(SCHEMES)}")
    p.add_argument("--equal-sensing", type=float, default=None, metavar="BITS_PER_S")
    p.add_argument("--out", type=str, default=None, help="CSV output path")
    p.add_argument("--config", type=str, default=None,
                   help="JSON config file; overrides flags")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--values", type=str, default=None, help="comma list of sweep values")
    p.add_argument("--devices", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="mecoffload",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("sweep-n", "throughput vs number of devices"),
                        ("sweep-sensing", "throughput vs max sensing rate"),
                        ("sweep-capacity", "throughput vs edge capacity"),
                        ("fairness", "Jain fairness index vs number of devices")]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
    p = sub.add_parser("single", help="solve one random scenario, dump JSON")
    p.add_argument("--devices", type=int, default=8)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--schemes", type=str, default=None)
    p.add_argument("--equal-sensing", type=float, default=None)
    p.add_argument("--out", type=str, default=None)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    sweep_kind = {"sweep-n": "device_count", "fairness": "device_count",
                  "sweep-sensing": "sensing_max",
                  "sweep-capacity": "capacity"}[args.command]
    defaults = {"device_count": DEFAULT_N_GRID,
                "sensing_max": DEFAULT_SENSING_GRID,
                "capacity": DEFAULT_CAPACITY_GRID}[sweep_kind]
    values = defaults
    if args.values:
        values = [float(v) for v in args.values.split(",")]
    schemes = ["tdma", "tdma_async", "noma_fixed", "fdma"]
    if args.command == "fairness":
        schemes = ["tdma", "noma_fixed", "fdma"]
    if args.schemes:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    n_devices = args.devices
    if n_devices is None:
        n_devices = 12 if sweep_kind == "capacity" else 8
    config = ExperimentConfig(sweep_kind=sweep_kind, sweep_values=values,
                              schemes=schemes, trial_count=args.trials,
                              seed=args.seed, n_devices=n_devices,
                              equal_sensing=args.equal_sensing)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            overrides = json.load(fh)
        system_over = overrides.pop("system", None)
        for key, value in overrides.items():
            if not hasattr(config, key):
                raise ValueError(f"unknown config key {key!r}")
            setattr(config, key, value)
        if system_over:
            config.system = SystemParams(**system_over)
    config.validate()
    return config


def _print_summary(rows):
    table = summarize(rows)
    print(f"{'scheme':<18} {'sweep':>12} {'mean_throughput':>18} {'mean_jfi':>10} "
          f"{'n':>6} {'failed':>7}")
    for (scheme, value), cell in sorted(table.items()):
        thr = "-" if cell["mean_throughput"] is None else f"{cell['mean_throughput']:.6g}"
        jfi = "-" if cell["mean_jfi"] is None else f"{cell['mean_jfi']:.4f}"
        print(f"{scheme:<18} {value:>12.6g} {thr:>18} {jfi:>10} "
              f"{cell['count']:>6} {cell['failed']:>7}")


def _run_single(args) -> int:
    schemes = ["tdma", "tdma_exhaustive", "tdma_async", "noma_fixed", "fdma"]
    if args.equal_sensing is not None:
        schemes.append("noma_timesharing")
    if args.schemes:
        schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    for s in schemes:
        if s not in SCHEMES:
            print(f"error: unknown scheme {s!r}", file=sys.stderr)
            return 1
    if "noma_timesharing" in schemes and args.equal_sensing is None:
        print("error: noma_timesharing requires --equal-sensing", file=sys.stderr)
        return 1
    s_range = ((args.equal_sensing, args.equal_sensing)
               if args.equal_sensing is not None else (1e5, 1e6))
    scenario = generate_scenario(SystemParams(), args.devices, s_range, args.seed)
    allocations = {}
    for scheme in schemes:
        if scheme == "tdma":
            allocations[scheme] = solve_tdma(scenario).to_dict()
        elif scheme == "tdma_exhaustive":
            if scenario.n_devices <= 8:
                _, out = exhaustive_sequence_search(scenario)
                allocations[scheme] = out.to_dict()
        elif scheme == "tdma_async":
            allocations[scheme] = solve_async(scenario).to_dict()
        elif scheme == "noma_fixed":
            allocations[scheme] = solve_noma(scenario).to_dict()
        elif scheme == "noma_timesharing":
            allocations[scheme] = solve_timesharing(scenario).to_dict()
        elif scheme == "fdma":
            allocations[scheme] = solve_fdma(scenario).to_dict()
    doc = {"scenario": scenario_to_dict(scenario), "allocations": allocations}
    text = json.dumps(doc, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "single":
        return _run_single(args)
    try:
        config = _config_from_args(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rows = run_sweep(config, workers=args.workers)
    if args.out:
        write_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    _print_summary(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
