"""Ventilation devices and the parametric airflow field they induce.

Fan-like devices (ceiling, pedestal and hand fans, plus the recirculating
split AC) contribute an axial jet

    v(s, r) = jet_speed * exp(-s / decay_length) * exp(-r^2 / (2 jet_radius^2))

along the unit orientation, for axial distance s >= 0 and zero behind the fan
plane. Window-like devices (window ventilator, open window) induce no bulk
velocity; they exchange aperture-adjacent voxels with outdoor air instead.
The split AC recirculates only: it moves air like a fan but its exchange
rate is pinned to zero, so it never removes CO2 from the room.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import RoomGeometry, Vec3, Voxel

FAN_KINDS = frozenset({"ceiling_fan", "pedestal_fan", "hand_fan", "split_ac"})
WINDOW_KINDS = frozenset({"window_ventilator", "open_window"})
DEVICE_KINDS = FAN_KINDS | WINDOW_KINDS


@dataclass
class VentilationDevice:
    id: str
    kind: str
    position: Vec3
    orientation: Vec3 | None = None
    state: bool = False
    # fan kinds
    jet_speed: float = 2.0
    jet_radius: float = 0.5
    decay_length: float = 4.0
    # window kinds
    exchange_rate: float = 0.0
    aperture: tuple[Voxel, ...] = ()
    # optional timed on/off transitions, (t_seconds, state) pairs
    schedule: tuple[tuple[float, bool], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in DEVICE_KINDS:
            raise ValueError(f"unknown device kind {self.kind!r}")
        self.position = tuple(float(c) for c in self.position)
        if self.kind in FAN_KINDS:
            if self.orientation is None:
                raise ValueError(f"device {self.id}: fan kind {self.kind} needs an orientation")
            self.orientation = _unit(self.orientation)
            if self.jet_speed < 0 or self.jet_radius <= 0 or self.decay_length <= 0:
                raise ValueError(f"device {self.id}: bad jet parameters")
            if self.kind == "split_ac" and self.exchange_rate != 0.0:
                raise ValueError("split_ac recirculates indoor air: exchange_rate must be 0")
        if self.exchange_rate < 0:
            raise ValueError(f"device {self.id}: exchange_rate must be >= 0")
        self.aperture = tuple(tuple(int(c) for c in v) for v in self.aperture)
        self.schedule = tuple((float(t), bool(s)) for t, s in self.schedule)

    @property
    def is_fan(self) -> bool:
        return self.kind in FAN_KINDS

    @property
    def is_window(self) -> bool:
        return self.kind in WINDOW_KINDS

    def aim(self, direction) -> None:
        if not self.is_fan:
            raise ValueError(f"device {self.id} ({self.kind}) cannot be aimed")
        self.orientation = _unit(direction)

    def flow_at(self, points: np.ndarray) -> np.ndarray:
        """Jet velocity (m/s) at ``points`` (N, 3); zeros when off or window kind."""
        if not self.state or not self.is_fan:
            return np.zeros_like(points)
        ax, ay, az = self.orientation
        px, py, pz = self.position
        rx = points[:, 0] - px
        ry = points[:, 1] - py
        rz = points[:, 2] - pz
        s = rx * ax + ry * ay + rz * az
        r2 = np.maximum(rx * rx + ry * ry + rz * rz - s * s, 0.0)
        mag = self.jet_speed * np.exp(-s / self.decay_length) * np.exp(
            -r2 / (2.0 * self.jet_radius**2)
        )
        mag = np.where(s >= 0.0, mag, 0.0)
        out = np.empty_like(points)
        out[:, 0] = mag * ax
        out[:, 1] = mag * ay
        out[:, 2] = mag * az
        return out

    def fingerprint(self) -> tuple:
        """Hashable summary of everything that affects the flow field."""
        if not self.is_fan:
            return (self.id, self.kind, False)
        return (
            self.id,
            self.kind,
            self.state,
            self.position,
            self.orientation,
            self.jet_speed,
            self.jet_radius,
            self.decay_length,
        )


def _unit(v) -> Vec3:
    n = math.sqrt(sum(float(c) ** 2 for c in v))
    if n == 0.0 or not math.isfinite(n):
        raise ValueError(f"orientation must be a nonzero finite vector, got {v!r}")
    return tuple(float(c) / n for c in v)


def velocity_at(devices, point, geometry: RoomGeometry) -> np.ndarray:
    """Superposed airflow (m/s) from all devices at one point inside the room."""
    geometry.require_inside(point)
    pts = np.asarray(point, dtype=float)[None, :]
    return velocity_field(devices, pts)[0]


def velocity_field(devices, points: np.ndarray) -> np.ndarray:
    """Superposed airflow at ``points`` (N, 3). Off devices contribute zero."""
    total = np.zeros_like(points)
    for dev in devices:
        total += dev.flow_at(points)
    return total


def max_speed_bound(devices, settling_velocity: float = 0.0) -> float:
    """Analytic upper bound on |velocity| anywhere: sum of active jet peaks."""
    bound = abs(settling_velocity)
    for dev in devices:
        if dev.is_fan and dev.state:
            bound += dev.jet_speed
    return bound


def clone_devices(devices) -> list[VentilationDevice]:
    """Independent mutable copies, for per-session device state."""
    return [replace(d) for d in devices]
