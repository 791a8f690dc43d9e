"""Naive loop implementation of the solver update rule, used as a test oracle.

Re-derives every substage from its mathematical definition with plain Python
loops: per-voxel source injection, semi-Lagrangian backtrace with trilinear
sampling and global mass restoration, 7-point no-flux diffusion, aperture
relaxation, and the zero clamp. No shared code with the vectorized solver
beyond numpy scalar math, so indexing/axis/slicing bugs there cannot hide.
"""

from __future__ import annotations

import math

import numpy as np

NEIGHBOR_ORDER = ((-1, 0, 0), (1, 0, 0), (0, -1, 0), (0, 1, 0), (0, 0, -1), (0, 0, 1))


def _open(geometry, i, j, k) -> bool:
    nx, ny, nz = geometry.shape
    return 0 <= i < nx and 0 <= j < ny and 0 <= k < nz and (i, j, k) not in geometry.blocked


def _fill_blocked(c, geometry):
    out = np.array(c)
    for (i, j, k) in sorted(geometry.blocked):
        acc, n = 0.0, 0
        for di, dj, dk in NEIGHBOR_ORDER:
            if _open(geometry, i + di, j + dj, k + dk):
                acc += c[i + di, j + dj, k + dk]
                n += 1
        out[i, j, k] = acc / n if n else 0.0
    return out


def _velocity(devices, settling, x, y, z):
    vx = vy = vz = 0.0
    for dev in devices:
        if not dev.state or not dev.is_fan:
            continue
        ax, ay, az = dev.orientation
        rx, ry, rz = x - dev.position[0], y - dev.position[1], z - dev.position[2]
        s = rx * ax + ry * ay + rz * az
        if s < 0.0:
            continue
        r2 = max(rx * rx + ry * ry + rz * rz - s * s, 0.0)
        mag = dev.jet_speed * np.exp(-s / dev.decay_length) * np.exp(
            -r2 / (2.0 * dev.jet_radius**2)
        )
        vx += mag * ax
        vy += mag * ay
        vz += mag * az
    return vx, vy, vz - settling


def _trilinear(arr, geometry, x, y, z):
    cell = geometry.cell_m
    shape = geometry.shape
    idx = []
    frac = []
    for a, coord in enumerate((x, y, z)):
        g = coord / cell - 0.5
        i = min(max(int(math.floor(g)), 0), shape[a] - 2)
        idx.append(i)
        frac.append(min(max(g - i, 0.0), 1.0))
    ix, iy, iz = idx
    tx, ty, tz = frac
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


def reference_step(field, sources, devices, params, dt):
    """Returns the advanced concentration array for one step() call."""
    geometry = field.geometry
    cell = geometry.cell_m
    nx, ny, nz = geometry.shape
    open_voxels = [
        (i, j, k)
        for i in range(nx)
        for j in range(ny)
        for k in range(nz)
        if (i, j, k) not in geometry.blocked
    ]

    # substep bound, same rule as the solver declares
    bound = cell * cell / (6.0 * params.diffusivity)
    vmax = abs(params.settling_velocity)
    for dev in devices:
        if dev.is_fan and dev.state:
            vmax += dev.jet_speed
    if vmax > 0:
        bound = min(bound, cell / vmax)
    rmax = 0.0
    for dev in devices:
        if dev.is_window and dev.state:
            rmax = max(rmax, dev.exchange_rate)
    if rmax > 0:
        bound = min(bound, 1.0 / rmax)
    h_max = min(params.dt, bound)
    n_sub = max(1, math.ceil(dt / h_max))
    h = dt / n_sub

    lam = params.diffusivity * h / (cell * cell)
    work = np.array(field.c)
    t = field.t

    for _ in range(n_sub):
        # sources
        for s in sources:
            if s.active(t) and s.emission_m3s > 0:
                vox = geometry.voxel_of(s.position)
                work[vox] += s.emission_m3s * h / geometry.cell_volume_m3 * 1e6

        # advection
        if vmax > 0:
            filled = _fill_blocked(work, geometry)
            m0 = float(np.sum(work[geometry.open_mask]))
            adv = {}
            for (i, j, k) in open_voxels:
                x = (i + 0.5) * cell
                y = (j + 0.5) * cell
                z = (k + 0.5) * cell
                vx, vy, vz = _velocity(devices, params.settling_velocity, x, y, z)
                dx = min(max(x - vx * h, 0.5 * cell), geometry.dims_m[0] - 0.5 * cell)
                dy = min(max(y - vy * h, 0.5 * cell), geometry.dims_m[1] - 0.5 * cell)
                dz = min(max(z - vz * h, 0.5 * cell), geometry.dims_m[2] - 0.5 * cell)
                adv[(i, j, k)] = _trilinear(filled, geometry, dx, dy, dz)
            m1 = float(np.sum(np.array([adv[v] for v in open_voxels])))
            scale = m0 / m1 if m1 > 0 else 1.0
            for v in open_voxels:
                work[v] = adv[v] * scale

        # diffusion
        new = np.array(work)
        for (i, j, k) in open_voxels:
            acc = 0.0
            for di, dj, dk in NEIGHBOR_ORDER:
                if _open(geometry, i + di, j + dj, k + dk):
                    acc += work[i + di, j + dj, k + dk] - work[i, j, k]
            new[i, j, k] = work[i, j, k] + lam * acc
        work = new

        # window exchange
        for dev in devices:
            if dev.is_window and dev.state and dev.exchange_rate > 0:
                for vox in dev.aperture:
                    if _open(geometry, *vox):
                        work[vox] += dev.exchange_rate * h * (params.ambient_ppm - work[vox])

        # clamp
        for v in open_voxels:
            if work[v] < 0.0:
                work[v] = 0.0

        t += h

    return work, t
