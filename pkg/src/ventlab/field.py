"""Discrete-time CO2 transport on the room voxel grid.

The solver is an operator-split explicit scheme. One call to :func:`step`
advances the field by ``dt`` seconds, internally subdivided into substeps of
length ``h <= min(params.dt, cell^2 / (6 D), cell / vmax, 1 / rmax)`` where
``vmax`` bounds airflow speed (sum of active jet peaks plus settling) and
``rmax`` is the fastest active window exchange rate. Each substep applies, in
order:

1. source injection: an active source adds ``rate * h / cell_volume * 1e6``
   ppm to its voxel;
2. semi-Lagrangian advection: every open voxel takes the trilinear sample of
   the pre-substep field at ``center - velocity * h`` (departure points are
   clamped to the voxel-center bounding box, blocked voxels are filled with
   the mean of their open 6-neighbors before sampling), then the whole open
   field is rescaled so total content matches the pre-advection total; fans
   move CO2, they never create or destroy it. Skipped entirely when the
   velocity bound is zero.
3. forward-Euler 7-point diffusion with no-flux faces at walls and blocked
   voxels;
4. relaxation of open aperture voxels of each active window device toward
   ambient: ``c += rate * h * (ambient - c)``;
5. clamp at zero (clamped mass is book-kept on the field).

Every update is a convex combination of current values (and ambient), so
non-negativity and the discrete maximum principle hold whenever the substep
bound is respected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .devices import max_speed_bound, velocity_field
from .errors import OutOfRoomError, SolverFault, StabilityError
from .geometry import RoomGeometry, Vec3

# order-of-magnitude CO2 output per source kind, m^3/s; scenario files may override
DEFAULT_EMISSION_M3S = {
    "occupant": 5.0e-6,
    "candle": 1.0e-6,
    "heated_baking_soda": 3.0e-6,
    "cooking": 2.0e-5,
}


@dataclass
class SimParams:
    """Solver configuration. Defaults are literature-typical, not ground truth."""

    diffusivity: float = 1.6e-5 + 5.0e-3  # molecular + turbulent mixing floor, m^2/s
    settling_velocity: float = 2.0e-3  # downward bias from CO2 density, m/s
    ambient_ppm: float = 400.0
    dt: float = 0.5  # preferred solver substep, s
    time_scale: float = 1.0  # simulated seconds per wall second
    auto_substep: bool = True

    def __post_init__(self) -> None:
        if self.diffusivity <= 0:
            raise ValueError("diffusivity must be positive")
        if self.settling_velocity < 0:
            raise ValueError("settling_velocity must be >= 0")
        if self.ambient_ppm < 0:
            raise ValueError("ambient_ppm must be >= 0")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.time_scale <= 0:
            raise ValueError("time_scale must be positive")


@dataclass
class Source:
    """A CO2 emitter occupying one voxel while its interval is active."""

    kind: str
    position: Vec3
    emission_m3s: float | None = None
    active_s: tuple[float, float] = (0.0, math.inf)
    id: str = ""

    def __post_init__(self) -> None:
        if self.kind not in DEFAULT_EMISSION_M3S:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.emission_m3s is None:
            self.emission_m3s = DEFAULT_EMISSION_M3S[self.kind]
        if self.emission_m3s < 0:
            raise ValueError("emission_m3s must be >= 0")
        self.position = tuple(float(c) for c in self.position)
        t_on, t_off = self.active_s
        if t_off < t_on:
            raise ValueError(f"source {self.id or self.kind}: active interval reversed")
        self.active_s = (float(t_on), float(t_off))

    def active(self, t: float) -> bool:
        return self.active_s[0] <= t < self.active_s[1]


class ConcentrationField:
    """Immutable snapshot of CO2 concentration (ppm) per voxel at time ``t``."""

    __slots__ = ("geometry", "c", "t", "clamped_m3", "_filled_cache")

    def __init__(self, geometry: RoomGeometry, c: np.ndarray, t: float, clamped_m3: float = 0.0):
        c = np.asarray(c, dtype=float)
        if c.shape != geometry.shape:
            raise ValueError(f"field shape {c.shape} != grid {geometry.shape}")
        c.flags.writeable = False
        self.geometry = geometry
        self.c = c
        self.t = float(t)
        self.clamped_m3 = float(clamped_m3)
        self._filled_cache: np.ndarray | None = None

    def _filled(self) -> np.ndarray:
        """Field with blocked voxels replaced by their open-neighbor mean."""
        if self._filled_cache is None:
            self._filled_cache = fill_blocked(self.c, self.geometry)
        return self._filled_cache


def init_field(geometry: RoomGeometry, ambient_ppm: float = 400.0) -> ConcentrationField:
    """Uniform field at the outdoor baseline, t = 0."""
    if ambient_ppm < 0:
        raise ValueError(f"ambient_ppm must be >= 0, got {ambient_ppm}")
    c = np.full(geometry.shape, float(ambient_ppm))
    return ConcentrationField(geometry, c, 0.0)


def total_co2_volume(field: ConcentrationField) -> float:
    """Physical CO2 content in m^3: sum over open voxels of c * 1e-6 * cell volume."""
    vals = field.c[field.geometry.open_mask]
    return math.fsum(vals.tolist()) * 1e-6 * field.geometry.cell_volume_m3


def sample(field: ConcentrationField, point) -> float:
    """Trilinear interpolation of the 8 surrounding voxel centers at ``point``."""
    geo = field.geometry
    geo.require_inside(point)
    if geo.is_blocked(geo.voxel_of(point)):
        raise OutOfRoomError(f"point {tuple(point)} lies inside a blocked voxel")
    pts = np.asarray(point, dtype=float)[None, :]
    return float(trilinear(field._filled(), geo, pts)[0])


def trilinear(arr: np.ndarray, geometry: RoomGeometry, pts: np.ndarray) -> np.ndarray:
    """Vectorized trilinear sampling of ``arr`` at points (N, 3) in metres.

    Points in the outer half-cell margin clamp to the boundary values.
    """
    cell = geometry.cell_m
    shape = geometry.shape
    g = pts / cell - 0.5
    i0 = np.empty((pts.shape[0], 3), dtype=np.intp)
    t = np.empty_like(g)
    for a in range(3):
        ia = np.clip(np.floor(g[:, a]), 0, shape[a] - 2).astype(np.intp)
        i0[:, a] = ia
        t[:, a] = np.clip(g[:, a] - ia, 0.0, 1.0)
    ix, iy, iz = i0[:, 0], i0[:, 1], i0[:, 2]
    tx, ty, tz = t[:, 0], t[:, 1], t[:, 2]
    c000 = arr[ix, iy, iz]
    c100 = arr[ix + 1, iy, iz]
    c010 = arr[ix, iy + 1, iz]
    c110 = arr[ix + 1, iy + 1, iz]
    c001 = arr[ix, iy, iz + 1]
    c101 = arr[ix + 1, iy, iz + 1]
    c011 = arr[ix, iy + 1, iz + 1]
    c111 = arr[ix + 1, iy + 1, iz + 1]
    cx00 = c000 * (1.0 - tx) + c100 * tx
    cx10 = c010 * (1.0 - tx) + c110 * tx
    cx01 = c001 * (1.0 - tx) + c101 * tx
    cx11 = c011 * (1.0 - tx) + c111 * tx
    cxy0 = cx00 * (1.0 - ty) + cx10 * ty
    cxy1 = cx01 * (1.0 - ty) + cx11 * ty
    return cxy0 * (1.0 - tz) + cxy1 * tz


def fill_blocked(c: np.ndarray, geometry: RoomGeometry) -> np.ndarray:
    """Copy of ``c`` with each blocked voxel set to the mean of its open 6-neighbors.

    Keeps interpolation across furniture faces from seeing stale interior
    values. Blocked voxels with no open neighbor become 0.
    """
    if not geometry.blocked:
        return c
    out = np.array(c)
    nx, ny, nz = geometry.shape
    open_m = geometry.open_mask
    for (i, j, k) in sorted(geometry.blocked):
        acc = 0.0
        n = 0
        for di, dj, dk in ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1)):
            ni, nj, nk = i + di, j + dj, k + dk
            if 0 <= ni < nx and 0 <= nj < ny and 0 <= nk < nz and open_m[ni, nj, nk]:
                acc += c[ni, nj, nk]
                n += 1
        out[i, j, k] = acc / n if n else 0.0
    return out


@lru_cache(maxsize=16)
def _diffusion_masks(geometry: RoomGeometry):
    """Per-direction masks: center open and the neighbor that way open and in bounds."""
    open_m = geometry.open_mask
    masks = {}
    pad = np.zeros(geometry.shape, dtype=bool)

    def shifted(axis: int, delta: int) -> np.ndarray:
        m = pad.copy()
        src = [slice(None)] * 3
        dst = [slice(None)] * 3
        if delta < 0:
            src[axis], dst[axis] = slice(None, -1), slice(1, None)
        else:
            src[axis], dst[axis] = slice(1, None), slice(None, -1)
        m[tuple(dst)] = open_m[tuple(src)]
        return m & open_m

    for axis, name in enumerate("xyz"):
        masks["m" + name] = shifted(axis, -1)
        masks["p" + name] = shifted(axis, +1)
    return masks


_PLAN_CACHE: dict[tuple, tuple] = {}


def _advection_plan(geometry: RoomGeometry, devices, settling: float, h: float):
    """Precomputed gather indices and weights for one semi-Lagrangian substep.

    Cached while the flow configuration is unchanged, which makes long runs
    with static devices cheap. The stored blend reproduces :func:`trilinear`
    exactly (same departure points, same expression order).
    """
    key = (
        id(geometry),
        tuple(d.fingerprint() for d in devices),
        float(settling),
        float(h),
    )
    plan = _PLAN_CACHE.get(key)
    if plan is not None:
        return plan
    centers = geometry.open_centers
    vel = velocity_field(devices, centers)
    if settling != 0.0:
        vel = vel.copy()
        vel[:, 2] -= settling
    dep = centers - vel * h
    cell = geometry.cell_m
    lo = 0.5 * cell
    for a in range(3):
        np.clip(dep[:, a], lo, geometry.dims_m[a] - lo, out=dep[:, a])

    shape = geometry.shape
    g = dep / cell - 0.5
    i0 = []
    w = []
    for a in range(3):
        ia = np.clip(np.floor(g[:, a]), 0, shape[a] - 2).astype(np.intp)
        i0.append(ia)
        w.append(np.clip(g[:, a] - ia, 0.0, 1.0))
    sy, sz = shape[1] * shape[2], shape[2]
    base = i0[0] * sy + i0[1] * sz + i0[2]
    flat = (base, base + sy, base + sz, base + sy + sz,
            base + 1, base + sy + 1, base + sz + 1, base + sy + sz + 1)
    plan = (flat, tuple(w))
    if len(_PLAN_CACHE) >= 64:
        _PLAN_CACHE.clear()
    _PLAN_CACHE[key] = plan
    return plan


def _apply_advection(filled: np.ndarray, plan) -> np.ndarray:
    """Trilinear blend over precomputed flat corner indices; mirrors trilinear()."""
    flat, (tx, ty, tz) = plan
    src = filled.reshape(-1)
    c000 = src.take(flat[0])
    c100 = src.take(flat[1])
    c010 = src.take(flat[2])
    c110 = src.take(flat[3])
    c001 = src.take(flat[4])
    c101 = src.take(flat[5])
    c011 = src.take(flat[6])
    c111 = src.take(flat[7])
    cx00 = c000 * (1.0 - tx) + c100 * tx
    cx10 = c010 * (1.0 - tx) + c110 * tx
    cx01 = c001 * (1.0 - tx) + c101 * tx
    cx11 = c011 * (1.0 - tx) + c111 * tx
    cxy0 = cx00 * (1.0 - ty) + cx10 * ty
    cxy1 = cx01 * (1.0 - ty) + cx11 * ty
    return cxy0 * (1.0 - tz) + cxy1 * tz


def substep_limit(geometry: RoomGeometry, devices, params: SimParams) -> float:
    """Stability bound on the substep for the current device configuration."""
    cell = geometry.cell_m
    h = cell * cell / (6.0 * params.diffusivity)
    vmax = max_speed_bound(devices, params.settling_velocity)
    if vmax > 0:
        h = min(h, cell / vmax)
    rmax = max(
        (d.exchange_rate for d in devices if d.is_window and d.state), default=0.0
    )
    if rmax > 0:
        h = min(h, 1.0 / rmax)
    return h


def step(
    field: ConcentrationField,
    sources,
    devices,
    params: SimParams,
    dt: float,
) -> ConcentrationField:
    """Advance the field ``dt`` simulated seconds; returns a new snapshot."""
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0:
        return field
    geo = field.geometry
    for s in sources:
        geo.require_inside(s.position)
        if geo.is_blocked(geo.voxel_of(s.position)):
            raise OutOfRoomError(f"source {s.id or s.kind} sits inside a blocked voxel")
    for d in devices:
        geo.require_inside(d.position)

    bound = substep_limit(geo, devices, params)
    if not params.auto_substep and dt > bound * (1.0 + 1e-12):
        raise StabilityError(
            f"dt={dt} exceeds stability bound {bound:.4g} s and substepping is disabled"
        )
    h_max = min(params.dt, bound)
    n_sub = max(1, math.ceil(dt / h_max))
    h = dt / n_sub

    cell = geo.cell_m
    cellvol = geo.cell_volume_m3
    open_m = geo.open_mask
    oix, oiy, oiz = geo.open_index
    masks = _diffusion_masks(geo)
    lam = params.diffusivity * h / (cell * cell)
    vbound = max_speed_bound(devices, params.settling_velocity)
    active_windows = [d for d in devices if d.is_window and d.state and d.exchange_rate > 0]

    work = field.c.copy()
    t = field.t
    clamped = field.clamped_m3

    for _ in range(n_sub):
        # 1. sources
        for s in sources:
            if s.active(t) and s.emission_m3s > 0:
                vox = geo.voxel_of(s.position)
                work[vox] += s.emission_m3s * h / cellvol * 1e6

        # 2. advection with global mass restoration
        if vbound > 0:
            plan = _advection_plan(geo, devices, params.settling_velocity, h)
            filled = fill_blocked(work, geo)
            m0 = float(np.sum(work[open_m]))
            adv = _apply_advection(filled, plan)
            m1 = float(np.sum(adv))
            if m1 > 0:
                adv *= m0 / m1
            work[oix, oiy, oiz] = adv

        # 3. diffusion, no-flux at walls and blocked faces
        lap = np.zeros_like(work)
        lap[1:, :, :] += np.where(masks["mx"][1:, :, :], work[:-1, :, :] - work[1:, :, :], 0.0)
        lap[:-1, :, :] += np.where(masks["px"][:-1, :, :], work[1:, :, :] - work[:-1, :, :], 0.0)
        lap[:, 1:, :] += np.where(masks["my"][:, 1:, :], work[:, :-1, :] - work[:, 1:, :], 0.0)
        lap[:, :-1, :] += np.where(masks["py"][:, :-1, :], work[:, 1:, :] - work[:, :-1, :], 0.0)
        lap[:, :, 1:] += np.where(masks["mz"][:, :, 1:], work[:, :, :-1] - work[:, :, 1:], 0.0)
        lap[:, :, :-1] += np.where(masks["pz"][:, :, :-1], work[:, :, 1:] - work[:, :, :-1], 0.0)
        work = work + lam * lap

        # 4. window exchange with ambient
        for d in active_windows:
            for vox in d.aperture:
                if open_m[vox]:
                    work[vox] += d.exchange_rate * h * (params.ambient_ppm - work[vox])

        # 5. clamp, bookkeeping the removed deficit
        neg = work < 0.0
        if neg.any():
            clamped += -float(np.sum(work[neg])) * 1e-6 * cellvol
            work[neg] = 0.0

        t += h

        if not np.isfinite(work).all():
            raise SolverFault(f"non-finite concentration at t={t:.3f}")

    return ConcentrationField(geo, work, t, clamped)
