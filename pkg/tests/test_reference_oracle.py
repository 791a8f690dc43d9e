"""The vectorized solver must match the naive loop oracle voxel for voxel."""

import numpy as np
import pytest

from ventlab.devices import VentilationDevice
from ventlab.field import ConcentrationField, SimParams, Source, step
from ventlab.geometry import RoomGeometry

from reference import reference_step


def random_case(rng: np.random.Generator):
    shape = tuple(int(rng.integers(3, 9)) for _ in range(3))
    cell = 0.5
    dims = tuple(s * cell for s in shape)
    n_blocked = int(rng.integers(0, 4))
    blocked = set()
    while len(blocked) < n_blocked:
        blocked.add(tuple(int(rng.integers(0, s)) for s in shape))
    geo = RoomGeometry(dims, cell, frozenset(blocked))
    if geo.open_mask.sum() == 0:
        return random_case(rng)

    c = 1800.0 * rng.random(geo.shape)
    field = ConcentrationField(geo, c, float(rng.uniform(0, 50)))

    def open_point():
        while True:
            p = tuple(rng.uniform(0.05, d - 0.05) for d in dims)
            if not geo.is_blocked(geo.voxel_of(p)):
                return p

    sources = [
        Source(
            "occupant",
            open_point(),
            float(rng.uniform(0, 2e-5)),
            active_s=(0.0, float(rng.uniform(10, 1e4))),
            id=f"s{i}",
        )
        for i in range(int(rng.integers(0, 3)))
    ]

    devices = []
    for i in range(int(rng.integers(0, 3))):
        ori = rng.normal(size=3)
        devices.append(
            VentilationDevice(
                f"fan{i}",
                str(rng.choice(["pedestal_fan", "ceiling_fan", "hand_fan", "split_ac"])),
                open_point(),
                orientation=tuple(ori / np.linalg.norm(ori)),
                state=bool(rng.random() < 0.8),
                jet_speed=float(rng.uniform(0.2, 2.5)),
                jet_radius=float(rng.uniform(0.2, 0.8)),
                decay_length=float(rng.uniform(1.0, 6.0)),
            )
        )
    if rng.random() < 0.6:
        n_ap = int(rng.integers(1, 5))
        aperture = set()
        while len(aperture) < n_ap:
            aperture.add(tuple(int(rng.integers(0, s)) for s in shape))
        devices.append(
            VentilationDevice(
                "win0",
                str(rng.choice(["window_ventilator", "open_window"])),
                open_point(),
                state=bool(rng.random() < 0.8),
                exchange_rate=float(rng.uniform(0.01, 1.5)),
                aperture=tuple(sorted(aperture)),
            )
        )

    params = SimParams(
        diffusivity=float(rng.uniform(1e-3, 3e-2)),
        settling_velocity=float(rng.choice([0.0, 2e-3, 8e-3])),
        ambient_ppm=400.0,
        dt=float(rng.uniform(0.2, 1.0)),
    )
    dt = float(rng.uniform(0.1, 3.0))
    return field, sources, devices, params, dt


def assert_matches_reference(field, sources, devices, params, dt):
    got = step(field, sources, devices, params, dt)
    want_c, want_t = reference_step(field, sources, devices, params, dt)
    np.testing.assert_allclose(got.c, want_c, rtol=0.0, atol=1e-12)
    assert got.t == pytest.approx(want_t, abs=1e-12)


@pytest.mark.parametrize("seed", range(30))
def test_step_matches_naive_reference(seed):
    rng = np.random.default_rng(seed)
    assert_matches_reference(*random_case(rng))


def test_point_impulse_diffusion_matches_stencil():
    # diffusion-only configuration: no devices, no settling
    geo = RoomGeometry((2.5, 2.5, 2.5), 0.5)
    c = np.zeros(geo.shape)
    c[2, 2, 2] = 1000.0
    field = ConcentrationField(geo, c, 0.0)
    params = SimParams(settling_velocity=0.0)
    ref = ConcentrationField(geo, c, 0.0)
    for _ in range(10):
        field = step(field, [], [], params, 0.5)
        want_c, _ = reference_step(ref, [], [], params, 0.5)
        ref = ConcentrationField(geo, want_c, field.t)
        np.testing.assert_allclose(field.c, want_c, rtol=0.0, atol=1e-12)
