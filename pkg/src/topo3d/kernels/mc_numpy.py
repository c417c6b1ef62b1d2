"""Numpy/python triangle emission for marching cubes (fallback path).

Only active cells reach this loop, so plain python iteration stays cheap.
"""

import numpy as np


def emit_triangles(coords, cfgs, vid0, vid1, vid2, tri_table, tri_count, edge_axis, edge_origin, offsets, n_tris):
    tris = np.empty((n_tris, 3), dtype=np.int32)
    vids = (vid0, vid1, vid2)
    for i in range(coords.shape[0]):
        x, y, z = coords[i]
        cfg = cfgs[i]
        base = offsets[i]
        row = tri_table[cfg]
        for t in range(tri_count[cfg]):
            for k in range(3):
                e = row[3 * t + k]
                tris[base + t, k] = vids[edge_axis[e]][
                    x + edge_origin[e, 0], y + edge_origin[e, 1], z + edge_origin[e, 2]
                ]
    return tris
