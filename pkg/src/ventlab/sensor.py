"""Virtual wrist-worn CO2 sensor.

Models the datasheet behaviors that matter to the game loop: a 60 s preheat
gate, 5 s periodic sampling with a cached reading in between, a first-order
response lag (tau = 10 s, so a step settles ~95% in about 30 s), a fixed
per-instance bias drawn inside the accuracy envelope, Gaussian repeatability
noise, and a slow drift that only matters on multi-day runs. Temperature and
humidity are scenario constants plus their own repeatability noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import RoomGeometry

YEAR_S = 365.25 * 24 * 3600.0


@dataclass(frozen=True)
class SensorSpec:
    """Datasheet numbers. CO2 accuracy is +-(base + pct * value)."""

    range_ppm: tuple[float, float] = (400.0, 5000.0)
    accuracy_base_ppm: float = 40.0
    accuracy_pct: float = 0.05
    repeatability_sd_ppm: float = 10.0
    preheat_s: float = 60.0
    poll_interval_s: float = 5.0
    drift_base_ppm_per_year: float = 5.0
    drift_pct_per_year: float = 0.005
    response_tau_s: float = 10.0
    temp_range_c: tuple[float, float] = (-10.0, 60.0)
    temp_repeatability_c: float = 0.1
    rh_range_pct: tuple[float, float] = (0.0, 95.0)
    rh_repeatability_pct: float = 0.4

    def __post_init__(self) -> None:
        lo, hi = self.range_ppm
        if not lo < hi:
            raise ValueError(f"range lower bound must be < upper, got {self.range_ppm}")
        for name in (
            "preheat_s",
            "poll_interval_s",
            "response_tau_s",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in (
            "accuracy_base_ppm",
            "accuracy_pct",
            "repeatability_sd_ppm",
            "drift_base_ppm_per_year",
            "drift_pct_per_year",
            "temp_repeatability_c",
            "rh_repeatability_pct",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def accuracy_ppm(self, value: float) -> float:
        return self.accuracy_base_ppm + self.accuracy_pct * value


@dataclass(frozen=True)
class Reading:
    device_id: str
    t: float
    co2_ppm: float | None
    temp_c: float | None
    rh_pct: float | None
    status: str  # ok | warming | out_of_range


class VirtualSensor:
    """One emulated device. Owned by a single session clock; calls are serialized."""

    def __init__(
        self,
        device_id: str,
        position,
        spec: SensorSpec = SensorSpec(),
        seed: int = 0,
        ambient_ppm: float = 400.0,
        ambient_temp_c: float = 25.0,
        ambient_rh_pct: float = 50.0,
        power_on_t: float = 0.0,
        geometry: RoomGeometry | None = None,
    ):
        self.device_id = device_id
        self.spec = spec
        self.geometry = geometry
        self.position = self._checked(position)
        self.power_on_t = float(power_on_t)
        self.lagged_ppm = float(ambient_ppm)
        self.ambient_temp_c = float(ambient_temp_c)
        self.ambient_rh_pct = float(ambient_rh_pct)
        self.rng = np.random.Generator(np.random.PCG64(seed))
        # fixed instance offset inside the accuracy envelope at the power-on level
        self.bias_ppm = float(self.rng.uniform(-1.0, 1.0)) * spec.accuracy_ppm(ambient_ppm)
        yearly = spec.drift_base_ppm_per_year + spec.drift_pct_per_year * ambient_ppm
        self.drift_rate_ppm_s = float(self.rng.uniform(-1.0, 1.0)) * yearly / YEAR_S
        self.drift_ppm = 0.0
        self.last_sample: Reading | None = None

    def _checked(self, point):
        point = tuple(float(c) for c in point)
        if self.geometry is not None:
            self.geometry.require_inside(point)
        return point

    def set_position(self, point) -> None:
        """Move the wrist anchor. Lag state stays: the sensor carries the memory."""
        self.position = self._checked(point)

    def tick(self, true_ppm: float, dt: float) -> None:
        """First-order relaxation of the internal value toward the local truth."""
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if true_ppm < 0:
            raise ValueError(f"true_ppm must be >= 0, got {true_ppm}")
        decay = math.exp(-dt / self.spec.response_tau_s)
        self.lagged_ppm = true_ppm + (self.lagged_ppm - true_ppm) * decay
        self.drift_ppm += self.drift_rate_ppm_s * dt

    def read(self, now: float) -> Reading:
        """Poll the device. Within 5 s of the last sample the cached Reading returns."""
        spec = self.spec
        if now - self.power_on_t < spec.preheat_s:
            return Reading(self.device_id, float(now), None, None, None, "warming")
        if self.last_sample is not None and now - self.last_sample.t < spec.poll_interval_s:
            return self.last_sample

        sd = spec.repeatability_sd_ppm
        noise = float(np.clip(self.rng.normal(0.0, sd), -3 * sd, 3 * sd))
        raw = self.lagged_ppm + self.bias_ppm + self.drift_ppm + noise
        lo, hi = spec.range_ppm
        co2 = min(max(raw, lo), hi)
        temp = self.ambient_temp_c + float(self.rng.normal(0.0, spec.temp_repeatability_c))
        temp = min(max(temp, spec.temp_range_c[0]), spec.temp_range_c[1])
        rh = self.ambient_rh_pct + float(self.rng.normal(0.0, spec.rh_repeatability_pct))
        rh = min(max(rh, spec.rh_range_pct[0]), spec.rh_range_pct[1])
        self.last_sample = Reading(self.device_id, float(now), co2, temp, rh, "ok")
        return self.last_sample
