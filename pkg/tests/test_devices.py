import math

import numpy as np
import pytest

from ventlab.devices import VentilationDevice, max_speed_bound, velocity_at
from ventlab.errors import OutOfRoomError
from ventlab.geometry import RoomGeometry

from conftest import make_fan


@pytest.fixture
def room():
    return RoomGeometry((8.0, 8.0, 3.0), 0.5)


def test_no_devices_superposition_is_zero(room):
    v = velocity_at([], (1.0, 1.0, 1.0), room)
    assert np.all(v == 0.0)


def test_on_axis_jet_closed_form(room):
    fan = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), jet_speed=2.0, decay_length=4.0)
    v = velocity_at([fan], (4.0, 0.0, 0.0), room)
    assert v[0] == pytest.approx(2.0 * math.exp(-1.0), rel=1e-12)
    assert v[1] == 0.0 and v[2] == 0.0


def test_off_axis_gaussian_falloff(room):
    fan = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), jet_radius=0.4)
    on_axis = np.linalg.norm(velocity_at([fan], (4.0, 0.0, 0.0), room))
    off_axis = np.linalg.norm(velocity_at([fan], (4.0, 1.2, 0.0), room))  # 3 radii off
    assert off_axis < 0.05 * on_axis


def test_zero_behind_fan_plane(room):
    fan = make_fan((4.0, 4.0, 1.0), (1.0, 0.0, 0.0))
    v = velocity_at([fan], (3.0, 4.0, 1.0), room)
    assert np.all(v == 0.0)


def test_off_device_contributes_zero(room):
    fan = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), on=False)
    assert np.all(velocity_at([fan], (4.0, 0.0, 0.0), room) == 0.0)


def test_window_kind_contributes_no_velocity(room):
    win = VentilationDevice(
        "w", "window_ventilator", (0.0, 4.0, 1.5), state=True,
        exchange_rate=0.5, aperture=((0, 8, 3),),
    )
    assert np.all(velocity_at([win], (1.0, 4.0, 1.5), room) == 0.0)


def test_superposition_adds(room):
    f1 = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    f2 = make_fan((0.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    v = velocity_at([f1, f2], (1.0, 1.0, 0.0), room)
    v1 = velocity_at([f1], (1.0, 1.0, 0.0), room)
    v2 = velocity_at([f2], (1.0, 1.0, 0.0), room)
    assert np.allclose(v, v1 + v2)


def test_point_outside_room_rejected(room):
    fan = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    with pytest.raises(OutOfRoomError):
        velocity_at([fan], (9.0, 0.0, 0.0), room)


def test_orientation_normalized_on_construction():
    fan = make_fan((0.0, 0.0, 0.0), (3.0, 4.0, 0.0))
    assert fan.orientation == pytest.approx((0.6, 0.8, 0.0))


def test_aim_renormalizes_and_rejects_zero():
    fan = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))
    fan.aim((0.0, 2.0, 0.0))
    assert fan.orientation == (0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        fan.aim((0.0, 0.0, 0.0))


def test_window_cannot_be_aimed():
    win = VentilationDevice("w", "open_window", (0.0, 0.0, 1.0), exchange_rate=0.1,
                            aperture=((0, 0, 2),))
    with pytest.raises(ValueError):
        win.aim((1.0, 0.0, 0.0))


def test_split_ac_must_not_exchange():
    with pytest.raises(ValueError):
        VentilationDevice("ac", "split_ac", (0.0, 0.0, 2.0), orientation=(1.0, 0.0, 0.0),
                          exchange_rate=0.1)


def test_fan_requires_orientation():
    with pytest.raises(ValueError):
        VentilationDevice("f", "pedestal_fan", (0.0, 0.0, 1.0))


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        VentilationDevice("x", "teleporter", (0.0, 0.0, 0.0))


def test_max_speed_bound_counts_active_fans():
    f_on = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), jet_speed=2.0)
    f_off = make_fan((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), jet_speed=9.0, on=False)
    assert max_speed_bound([f_on, f_off], settling_velocity=0.1) == pytest.approx(2.1)
