import numpy as np
import pytest

from ventlab.devices import VentilationDevice
from ventlab.field import ConcentrationField, SimParams
from ventlab.geometry import RoomGeometry


@pytest.fixture
def small_room() -> RoomGeometry:
    return RoomGeometry((3.0, 3.0, 3.0), 0.5)


@pytest.fixture
def quiet_params() -> SimParams:
    """No settling and generous dt: isolates whichever stage a test targets."""
    return SimParams(settling_velocity=0.0)


def random_field(geometry: RoomGeometry, rng, lo=0.0, hi=1500.0) -> ConcentrationField:
    c = lo + (hi - lo) * rng.random(geometry.shape)
    c[~geometry.open_mask] = 400.0
    return ConcentrationField(geometry, c, 0.0)


def make_fan(position, orientation, on=True, **kw) -> VentilationDevice:
    kw.setdefault("jet_speed", 2.0)
    kw.setdefault("jet_radius", 0.4)
    kw.setdefault("decay_length", 4.0)
    return VentilationDevice(
        "fan-t", "pedestal_fan", position, orientation=orientation, state=on, **kw
    )


def make_window(aperture_voxels, rate=0.2, on=True, kind="window_ventilator", position=(0.0, 0.0, 1.0)):
    return VentilationDevice(
        "win-t", kind, position, state=on, exchange_rate=rate, aperture=tuple(aperture_voxels)
    )
