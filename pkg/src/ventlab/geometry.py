"""Room discretization: an axis-aligned voxel grid with blocked (furniture) cells.

Voxel (i, j, k) spans ``[i*cell_m, (i+1)*cell_m)`` along each axis and its
center sits at ``(i + 0.5) * cell_m``. Blocked voxels stand in for cubicle
walls and furniture: they are no-flux for diffusion, zero-velocity for
advection, and excluded from mass totals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GeometryError, OutOfRoomError

Vec3 = tuple[float, float, float]
Voxel = tuple[int, int, int]


@dataclass(eq=False)
class RoomGeometry:
    """Closed rectangular room of ``dims_m`` metres, cubic voxels of edge ``cell_m``.

    Treated as immutable after construction; derived arrays are cached.
    """

    dims_m: Vec3
    cell_m: float = 0.5
    blocked: frozenset[Voxel] = frozenset()

    def __post_init__(self) -> None:
        self.dims_m = tuple(float(d) for d in self.dims_m)
        self.cell_m = float(self.cell_m)
        if len(self.dims_m) != 3:
            raise GeometryError(f"dims_m must have 3 components, got {self.dims_m!r}")
        if self.cell_m <= 0:
            raise GeometryError(f"cell_m must be positive, got {self.cell_m}")
        if any(d <= 0 for d in self.dims_m):
            raise GeometryError(f"room dims must be positive, got {self.dims_m}")
        self.blocked = frozenset(tuple(int(c) for c in v) for v in self.blocked)
        nx, ny, nz = self.shape
        if min(nx, ny, nz) < 2:
            raise GeometryError(
                f"grid must be at least 2 cells per axis, got {self.shape} "
                f"for dims {self.dims_m} at cell {self.cell_m}"
            )
        for v in self.blocked:
            if len(v) != 3 or not all(0 <= v[a] < self.shape[a] for a in range(3)):
                raise GeometryError(f"blocked voxel {v} outside grid {self.shape}")
        if len(self.blocked) >= nx * ny * nz:
            raise GeometryError("every voxel is blocked")

    @cached_property
    def shape(self) -> tuple[int, int, int]:
        return tuple(math.ceil(d / self.cell_m) for d in self.dims_m)

    @property
    def cell_volume_m3(self) -> float:
        return self.cell_m**3

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.shape
        return nx * ny * nz

    def contains(self, point) -> bool:
        return all(0.0 <= point[a] <= self.dims_m[a] for a in range(3))

    def require_inside(self, point) -> None:
        if len(point) != 3:
            raise OutOfRoomError(f"point must have 3 components, got {point!r}")
        if not self.contains(point):
            raise OutOfRoomError(f"point {tuple(point)} outside room {self.dims_m}")

    def voxel_of(self, point) -> Voxel:
        """Voxel containing ``point``; the far boundary maps to the last cell."""
        self.require_inside(point)
        return tuple(
            min(int(point[a] / self.cell_m), self.shape[a] - 1) for a in range(3)
        )

    def center_of(self, voxel: Voxel) -> Vec3:
        return tuple((voxel[a] + 0.5) * self.cell_m for a in range(3))

    def is_blocked(self, voxel: Voxel) -> bool:
        return tuple(voxel) in self.blocked

    @cached_property
    def open_mask(self) -> np.ndarray:
        """Boolean array, True where the voxel is open (not blocked)."""
        mask = np.ones(self.shape, dtype=bool)
        for v in self.blocked:
            mask[v] = False
        mask.flags.writeable = False
        return mask

    @cached_property
    def open_centers(self) -> np.ndarray:
        """(N, 3) centers of all open voxels in C order, read-only."""
        idx = np.argwhere(self.open_mask)
        centers = (idx + 0.5) * self.cell_m
        centers.flags.writeable = False
        return centers

    @cached_property
    def open_index(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Index arrays of open voxels, aligned with :attr:`open_centers`."""
        idx = np.argwhere(self.open_mask)
        return idx[:, 0], idx[:, 1], idx[:, 2]

    def voxels_in_box(self, lo, hi) -> list[Voxel]:
        """All voxels whose centers fall inside the axis-aligned box [lo, hi]."""
        out = []
        nx, ny, nz = self.shape
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    c = self.center_of((i, j, k))
                    if all(lo[a] <= c[a] <= hi[a] for a in range(3)):
                        out.append((i, j, k))
        return out
