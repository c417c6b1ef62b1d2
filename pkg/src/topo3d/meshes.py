"""Triangle meshes and marching-cubes isosurface extraction.

The input grid is padded with one empty voxel shell, so every isosurface is
closed. Vertices sit on lattice-cell edges by linear interpolation at the iso
value; the interpolation parameter is clamped away from the endpoints so no
zero-area triangles can be produced by coinciding vertices. Coordinates are
voxel indices scaled by the grid spacing (millimeters).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grids import VoxelGrid
from .mc_tables import EDGE_AXIS, EDGE_ORIGIN, TRI_COUNT, TRI_TABLE

_T_CLAMP = 1e-6


@dataclass(frozen=True)
class TriangleMesh:
    """Vertices in mm and triangle index triples, outward-oriented."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        tris = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)
        if tris.size:
            if int(tris.min()) < 0 or int(tris.max()) >= len(verts):
                raise ValueError("triangle indices out of range")
            if float(self._areas().min()) <= 0.0:
                raise ValueError("mesh contains a degenerate (zero-area) triangle")

    def _corners(self):
        v = self.vertices
        t = self.triangles
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    def _areas(self):
        if not self.triangles.size:
            return np.zeros(0)
        a, b, c = self._corners()
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    @property
    def surface_area_mm2(self) -> float:
        return float(self._areas().sum())

    @property
    def enclosed_volume_ml(self) -> float:
        """Signed divergence-theorem volume; positive for outward orientation."""
        if not self.triangles.size:
            return 0.0
        a, b, c = self._corners()
        vol_mm3 = float(np.einsum("ij,ij->", a, np.cross(b, c))) / 6.0
        return vol_mm3 / 1000.0

    def edge_counts(self):
        """Counts of each undirected edge; a closed mesh has every count == 2."""
        t = self.triangles
        if not t.size:
            return np.zeros(0, dtype=np.int64)
        edges = np.concatenate([t[:, (0, 1)], t[:, (1, 2)], t[:, (2, 0)]])
        edges = np.sort(edges, axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return counts

    def is_closed(self) -> bool:
        counts = self.edge_counts()
        return bool(counts.size == 0 or np.all(counts == 2))


def marching_cubes(shape: VoxelGrid, iso: float = 0.5) -> TriangleMesh:
    """Extract the iso-surface of a voxel grid as a closed triangle mesh."""
    if not 0.0 < iso < 1.0:
        raise ValueError(f"iso must lie in (0, 1), got {iso}")
    g = np.pad(np.asarray(shape.values, dtype=np.float64), 1)
    inside = g > iso
    m = g.shape[0]

    cuts = [
        inside[:-1, :, :] != inside[1:, :, :],
        inside[:, :-1, :] != inside[:, 1:, :],
        inside[:, :, :-1] != inside[:, :, 1:],
    ]
    n_verts = int(sum(int(c.sum()) for c in cuts))
    if n_verts == 0:
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int32))

    # one vertex per cut lattice edge, ids assigned axis-major then raster order
    vids = []
    offset = 0
    verts = np.empty((n_verts, 3))
    for axis, cut in enumerate(cuts):
        vid = np.full(cut.shape, -1, dtype=np.int32)
        pos = np.argwhere(cut)
        k = len(pos)
        vid[cut] = np.arange(offset, offset + k, dtype=np.int32)
        v0 = g[pos[:, 0], pos[:, 1], pos[:, 2]]
        step = np.zeros_like(pos)
        step[:, axis] = 1
        p1 = pos + step
        v1 = g[p1[:, 0], p1[:, 1], p1[:, 2]]
        t = np.clip((iso - v0) / (v1 - v0), _T_CLAMP, 1.0 - _T_CLAMP)
        xyz = pos.astype(np.float64)
        xyz[:, axis] += t
        verts[offset : offset + k] = xyz - 1.0  # undo the zero-padding shift
        vids.append(vid)
        offset += k

    cfg = np.zeros((m - 1, m - 1, m - 1), dtype=np.int64)
    for c in range(8):
        ox, oy, oz = c & 1, (c >> 1) & 1, (c >> 2) & 1
        cfg |= inside[ox : m - 1 + ox, oy : m - 1 + oy, oz : m - 1 + oz].astype(np.int64) << c

    active = np.argwhere((cfg != 0) & (cfg != 255))
    cfgs = cfg[active[:, 0], active[:, 1], active[:, 2]]
    per_cube = TRI_COUNT[cfgs].astype(np.int64)
    offsets = np.zeros(len(active) + 1, dtype=np.int64)
    np.cumsum(per_cube, out=offsets[1:])
    tris = kernels.emit_triangles(
        np.ascontiguousarray(active),
        cfgs,
        vids[0],
        vids[1],
        vids[2],
        TRI_TABLE,
        TRI_COUNT,
        EDGE_AXIS,
        EDGE_ORIGIN,
        offsets,
        int(offsets[-1]),
    )
    verts *= np.asarray(shape.spacing_mm)
    return TriangleMesh(verts, tris)
