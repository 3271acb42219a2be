"""System/device parameter types, random scenario generation, and link rates.

Units are bits, seconds, watts and Hz throughout. Rates returned by
:func:`link_rate` include the bandwidth factor, so sensing rates (bits/s)
and the edge computing capacity (offloaded bits/s) are directly comparable
with radio rates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Fading draws with rho^2 below this are resampled: a zero-gain device is
# unreachable and makes several closed forms singular.
MIN_RHO_SQ = 1e-12


@dataclass
class SystemParams:
    """Frame-level constants shared by every device."""

    frame_T: float = 1.0
    bandwidth_B: float = 1e6
    noise_N0: float = 1e-9
    edge_capacity_C: float = 1e7
    pathloss_c: float = 1e-3
    pathloss_gamma: float = 3.5

    def __post_init__(self):
        for name in ("frame_T", "bandwidth_B", "noise_N0", "edge_capacity_C",
                     "pathloss_c", "pathloss_gamma"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SystemParams.{name} must be strictly positive")


@dataclass
class Device:
    """One sensing device; gain_h is stored directly so hand-built devices work."""

    id: int
    gain_h: float
    sensing_s: float
    max_power_P: float = 1.0
    weight_w: float = 1.0
    distance_d: float = 1.0
    fading_rho: float = 1.0

    def __post_init__(self):
        if not self.gain_h > 0:
            raise ValueError("gain_h must be > 0")
        if not self.sensing_s > 0:
            raise ValueError("sensing_s must be > 0")
        if not self.max_power_P > 0:
            raise ValueError("max_power_P must be > 0")
        if self.weight_w < 0:
            raise ValueError("weight_w must be >= 0")


@dataclass
class Scenario:
    system: SystemParams
    devices: list[Device] = field(default_factory=list)

    def __post_init__(self):
        if len(self.devices) < 1:
            raise ValueError("scenario needs at least one device")
        ids = [d.id for d in self.devices]
        if sorted(ids) != list(range(len(self.devices))):
            raise ValueError("device ids must be exactly 0..N-1")

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    def gains(self) -> np.ndarray:
        return np.array([d.gain_h for d in self.devices])

    def sensing(self) -> np.ndarray:
        return np.array([d.sensing_s for d in self.devices])

    def powers(self) -> np.ndarray:
        return np.array([d.max_power_P for d in self.devices])

    def weights(self) -> np.ndarray:
        return np.array([d.weight_w for d in self.devices])


def generate_scenario(params: SystemParams, n_devices: int,
                      sensing_range, seed: int,
                      max_power: float = 1.0, weight: float = 1.0,
                      unit_fading: bool = False) -> Scenario:
    """Draw a random scenario: distances uniform on (0, 50] m, unit-variance
    Gaussian fading, sensing rates uniform on [s_min, s_max].

    Deterministic for a given seed. ``unit_fading=True`` pins rho to 1 so the
    pathloss model can be checked in isolation.
    """
    s_min, s_max = float(sensing_range[0]), float(sensing_range[1])
    if n_devices < 1:
        raise ValueError("n_devices must be >= 1")
    if s_min <= 0 or s_min > s_max:
        raise ValueError(f"invalid sensing range [{s_min}, {s_max}]")

    rng = np.random.default_rng(seed)
    devices = []
    for i in range(n_devices):
        # 50*(1 - u) with u in [0, 1) lands in (0, 50].
        d = 50.0 * (1.0 - rng.random())
        rho = 1.0
        if not unit_fading:
            rho = rng.standard_normal()
            while rho * rho < MIN_RHO_SQ:
                rho = rng.standard_normal()
        h = params.pathloss_c * d ** (-params.pathloss_gamma) * rho * rho
        s = s_min + (s_max - s_min) * rng.random()
        devices.append(Device(id=i, gain_h=h, sensing_s=s, max_power_P=max_power,
                              weight_w=weight, distance_d=d, fading_rho=rho))
    return Scenario(system=params, devices=devices)


def link_rate(device: Device, system: SystemParams, interference: float = 0.0) -> float:
    """Shannon uplink rate in bits/s at peak power; interference in watts*gain units."""
    if interference < 0:
        raise ValueError("interference must be >= 0")
    snr = device.max_power_P * device.gain_h / (system.noise_N0 + interference)
    return system.bandwidth_B * np.log2(1.0 + snr)


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "system": {
            "frame_T": scenario.system.frame_T,
            "bandwidth_B": scenario.system.bandwidth_B,
            "noise_N0": scenario.system.noise_N0,
            "edge_capacity_C": scenario.system.edge_capacity_C,
            "pathloss_c": scenario.system.pathloss_c,
            "pathloss_gamma": scenario.system.pathloss_gamma,
        },
        "devices": [
            {
                "id": d.id,
                "distance_d": d.distance_d,
                "fading_rho": d.fading_rho,
                "gain_h": d.gain_h,
                "sensing_s": d.sensing_s,
                "max_power_P": d.max_power_P,
                "weight_w": d.weight_w,
            }
            for d in scenario.devices
        ],
    }


def scenario_from_dict(data: dict) -> Scenario:
    system = SystemParams(**data["system"])
    devices = [Device(**dev) for dev in data["devices"]]
    return Scenario(system=system, devices=devices)


def scenario_to_json(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2)


def scenario_from_json(text: str) -> Scenario:
    return scenario_from_dict(json.loads(text))
