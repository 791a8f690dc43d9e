"""Indoor CO2 voxel simulation, virtual wrist sensor, bubble visuals, and the
interactive ventilation game behind them."""

from .bubbles import Bubble, BubbleStyle, HealthThresholds, bubble_visual, merge_bubbles, update_bubbles
from .devices import VentilationDevice, velocity_at
from .field import ConcentrationField, SimParams, Source, init_field, sample, step, total_co2_volume
from .geometry import RoomGeometry
from .scenario import Scenario, load_bundled, load_scenario, save_scenario
from .sensor import Reading, SensorSpec, VirtualSensor
from .session import Command, Session, SessionMetrics, compute_metrics

__all__ = [
    "Bubble",
    "BubbleStyle",
    "Command",
    "ConcentrationField",
    "HealthThresholds",
    "Reading",
    "RoomGeometry",
    "Scenario",
    "SensorSpec",
    "Session",
    "SessionMetrics",
    "SimParams",
    "Source",
    "VentilationDevice",
    "VirtualSensor",
    "bubble_visual",
    "compute_metrics",
    "init_field",
    "load_bundled",
    "load_scenario",
    "merge_bubbles",
    "sample",
    "save_scenario",
    "step",
    "total_co2_volume",
    "update_bubbles",
    "velocity_at",
]

__version__ = "0.1.0"
