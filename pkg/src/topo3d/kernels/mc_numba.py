"""Jitted triangle emission for marching cubes."""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _emit(coords, cfgs, vid0, vid1, vid2, tri_table, tri_count, edge_axis, edge_origin, offsets, tris):
    for i in range(coords.shape[0]):
        x, y, z = coords[i, 0], coords[i, 1], coords[i, 2]
        cfg = cfgs[i]
        base = offsets[i]
        for t in range(tri_count[cfg]):
            for k in range(3):
                e = tri_table[cfg, 3 * t + k]
                ex = x + edge_origin[e, 0]
                ey = y + edge_origin[e, 1]
                ez = z + edge_origin[e, 2]
                a = edge_axis[e]
                if a == 0:
                    tris[base + t, k] = vid0[ex, ey, ez]
                elif a == 1:
                    tris[base + t, k] = vid1[ex, ey, ez]
                else:
                    tris[base + t, k] = vid2[ex, ey, ez]


def emit_triangles(coords, cfgs, vid0, vid1, vid2, tri_table, tri_count, edge_axis, edge_origin, offsets, n_tris):
    tris = np.empty((n_tris, 3), dtype=np.int32)
    _emit(coords, cfgs, vid0, vid1, vid2, tri_table, tri_count, edge_axis, edge_origin, offsets, tris)
    return tris
