"""Latency budget for the detect -> actuate -> deliver chain of a spot sprayer.

Stages are summed serially; overlap between capturing frame n+1 and
processing frame n is not modelled.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

KMH_PER_MPS = 3.6


@dataclass(frozen=True)
class EventBudget:
    """Per-stage durations in seconds.

    The defaults are an illustrative budget for a Raspberry Pi class
    detector driving a solenoid valve, not measured values.
    """

    e11_capture: float = 0.033
    e12_processing: float = 0.025
    e13_signal: float = 0.001
    e21_relay: float = 0.005
    e22_solenoid: float = 0.020
    e31_flow: float = 0.015
    e32_flight: float = 0.020

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")

    @classmethod
    def stage_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class SprayGeometry:
    camera_to_nozzle_distance: float = 1.0  # m
    fov_length: float = 1.3  # m along travel
    fps: float = 30.0

    def __post_init__(self):
        if self.camera_to_nozzle_distance <= 0 or self.fov_length <= 0 or self.fps <= 0:
            raise ValueError("distance, fov_length and fps must all be > 0")


@dataclass(frozen=True)
class Feasibility:
    speed_kmh: float
    slack: float  # s
    frames_per_weed: float
    capture_gap: bool
    feasible: bool


def total_latency(budget: EventBudget) -> float:
    return float(sum(budget.as_dict().values()))


def max_ground_speed(budget: EventBudget, geometry: SprayGeometry) -> float:
    """Fastest ground speed (m/s) at which the whole chain fits between camera and nozzle."""
    latency = total_latency(budget)
    if latency <= 0:
        raise ValueError("total latency is zero; ground speed is unbounded")
    return geometry.camera_to_nozzle_distance / latency


def frames_per_weed(geometry: SprayGeometry, speed_kmh: float) -> float:
    if speed_kmh <= 0:
        raise ValueError("speed must be > 0")
    return geometry.fov_length * geometry.fps / (speed_kmh / KMH_PER_MPS)


def feasibility_report(budget: EventBudget, geometry: SprayGeometry, speed_kmh: float) -> Feasibility:
    """Slack = time to reach the nozzle minus total latency; feasible iff slack >= 0 and >= 1 frame per weed."""
    fpw = frames_per_weed(geometry, speed_kmh)
    slack = geometry.camera_to_nozzle_distance / (speed_kmh / KMH_PER_MPS) - total_latency(budget)
    # exact boundary speeds land within rounding of zero
    if abs(slack) < 1e-12:
        slack = 0.0
    capture_gap = fpw < 1.0
    return Feasibility(speed_kmh, slack, fpw, capture_gap, slack >= 0 and not capture_gap)


def sensitivity_table(budget: EventBudget, geometry: SprayGeometry, rel: float = 0.2) -> list[dict]:
    """Max speed (km/h) with each stage scaled by 1 - rel and 1 + rel."""
    base = max_ground_speed(budget, geometry) * KMH_PER_MPS
    rows = []
    for name in EventBudget.stage_names():
        value = getattr(budget, name)
        lo = replace(budget, **{name: value * (1 - rel)})
        hi = replace(budget, **{name: value * (1 + rel)})
        rows.append({
            "stage": name,
            "duration_s": value,
            "max_kmh_minus": max_ground_speed(lo, geometry) * KMH_PER_MPS,
            "max_kmh_base": base,
            "max_kmh_plus": max_ground_speed(hi, geometry) * KMH_PER_MPS,
        })
    return rows
