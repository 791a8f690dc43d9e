"""Cross-cutting solver properties over randomized scenarios."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ventlab.field import ConcentrationField, SimParams, Source, step, total_co2_volume
from ventlab.geometry import RoomGeometry

from conftest import make_fan, make_window
from test_reference_oracle import random_case


@pytest.mark.parametrize("seed", range(12))
def test_non_negativity_and_finiteness_random_scenarios(seed):
    rng = np.random.default_rng(500 + seed)
    field, sources, devices, params, dt = random_case(rng)
    for _ in range(25):
        field = step(field, sources, devices, params, dt)
        assert np.isfinite(field.c).all()
        assert field.c.min() >= 0.0


@settings(max_examples=25, deadline=None)
@given(
    ambient=st.floats(0.0, 800.0),
    diffusivity=st.floats(1e-4, 5e-2),
    settling=st.floats(0.0, 1e-2),
    jet=st.floats(0.1, 3.0),
    dt=st.floats(0.1, 5.0),
)
def test_non_negativity_hypothesis(ambient, diffusivity, settling, jet, dt):
    geo = RoomGeometry((2.0, 2.0, 2.0), 0.5)
    c = np.zeros(geo.shape)
    c[0, 0, 0] = 2000.0  # worst case: sharp impulse against a corner
    field = ConcentrationField(geo, c, 0.0)
    params = SimParams(diffusivity=diffusivity, settling_velocity=settling,
                       ambient_ppm=ambient)
    fan = make_fan((1.0, 1.0, 1.0), (1.0, -0.5, 0.25), jet_speed=jet)
    win = make_window([(3, 3, 3)], rate=0.4)
    src = Source("candle", (0.3, 1.7, 0.3), 2e-6)
    for _ in range(10):
        field = step(field, [src], [fan, win], params, dt)
    assert field.c.min() >= 0.0
    assert np.isfinite(field.c).all()


def test_mass_never_created_by_fans_only():
    rng = np.random.default_rng(77)
    geo = RoomGeometry((3.0, 3.0, 2.0), 0.5)
    c = 2000.0 * rng.random(geo.shape)
    field = ConcentrationField(geo, c, 0.0)
    params = SimParams()
    fans = [make_fan((0.5, 0.5, 0.5), (1, 1, 0)), make_fan((2.5, 2.5, 1.5), (-1, 0, 0))]
    m0 = total_co2_volume(field)
    for _ in range(400):
        field = step(field, [], fans, params, 0.5)
        m = total_co2_volume(field)
        assert abs(m - m0) / m0 < 1e-9
