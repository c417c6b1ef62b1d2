"""Cube-case tables for marching cubes, generated constructively.

Corner ``c`` of the unit cell sits at ``(c & 1, c >> 1 & 1, c >> 2 & 1)``.
The 12 cell edges are enumerated axis-major: edges 0-3 run along x, 4-7
along y, 8-11 along z, each group ordered by its low-corner index.

For each of the 256 inside/outside corner configurations the surface patch
is built by intersecting the isocontour with every cell face and walking the
resulting segments into closed cycles, which are then fan-triangulated.
On an ambiguous face (two diagonally opposite inside corners) the two inside
corners are always kept separated. Because that choice depends only on the
face's own corner values, the two cells sharing any face always agree on the
contour there, so meshes over zero-boundary grids are watertight by
construction. Triangles wind counter-clockwise seen from outside the shape.
"""

import numpy as np

EDGE_CORNERS = []
for _axis in range(3):
    for _c in range(8):
        if not (_c >> _axis) & 1:
            EDGE_CORNERS.append((_c, _c | (1 << _axis)))
EDGE_CORNERS = tuple(EDGE_CORNERS)

EDGE_AXIS = np.array([0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2], dtype=np.int32)
EDGE_ORIGIN = np.array(
    [[c & 1, (c >> 1) & 1, (c >> 2) & 1] for c, _ in EDGE_CORNERS], dtype=np.int32
)

_EDGE_ID = {frozenset(pair): i for i, pair in enumerate(EDGE_CORNERS)}


def _corner_pos(c):
    return np.array([c & 1, (c >> 1) & 1, (c >> 2) & 1], dtype=float)


def _faces():
    """Each face as its 4 corners in cyclic order."""
    out = []
    for axis in range(3):
        b, c = [a for a in range(3) if a != axis]
        for side in (0, 1):
            def corner(bb, cc):
                v = side << axis
                v |= bb << b
                v |= cc << c
                return v

            out.append((corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)))
    return out

_FACES = _faces()


def _face_segments(mask, quad):
    """Unordered vertex(=edge-id) pairs where the contour crosses this face."""
    ins = [(mask >> q) & 1 for q in quad]
    edges = [_EDGE_ID[frozenset((quad[i], quad[(i + 1) % 4]))] for i in range(4)]
    n = sum(ins)
    if n in (0, 4):
        return []
    if n == 1 or n == 3:
        target = 1 if n == 1 else 0
        i = ins.index(target)
        return [(edges[(i - 1) % 4], edges[i])]
    # two inside corners
    i = ins.index(1)
    if ins[(i + 1) % 4] == 1 or ins[(i - 1) % 4] == 1:
        if ins[(i - 1) % 4] == 1:
            i = (i - 1) % 4
        return [(edges[(i - 1) % 4], edges[(i + 1) % 4])]
    # diagonal pair: keep the inside corners separated
    j = (i + 2) % 4
    return [
        (edges[(i - 1) % 4], edges[i]),
        (edges[(j - 1) % 4], edges[j]),
    ]


def _cycles(segments):
    adj = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen_seg = set()
    cycles = []
    for start in sorted(adj):
        for nxt in adj[start]:
            if (start, nxt) in seen_seg:
                continue
            cycle = [start]
            prev, cur = start, nxt
            seen_seg.add((start, nxt))
            seen_seg.add((nxt, start))
            while cur != start:
                cycle.append(cur)
                a, b = adj[cur]
                nxt2 = b if a == prev else a
                seen_seg.add((cur, nxt2))
                seen_seg.add((nxt2, cur))
                prev, cur = cur, nxt2
            cycles.append(cycle)
    return cycles


def _orient(cycle, mask):
    pts = []
    outward = np.zeros(3)
    for e in cycle:
        c0, c1 = EDGE_CORNERS[e]
        p0, p1 = _corner_pos(c0), _corner_pos(c1)
        pts.append(0.5 * (p0 + p1))
        if (mask >> c0) & 1:  # c0 inside, c1 outside
            outward += p1 - p0
        else:
            outward += p0 - p1
    normal = np.zeros(3)
    for i in range(len(pts)):
        normal += np.cross(pts[i], pts[(i + 1) % len(pts)])
    if float(normal @ outward) < 0.0:
        return cycle[::-1]
    return cycle


def _build_tables():
    tri_lists = []
    for mask in range(256):
        segments = []
        for quad in _FACES:
            segments.extend(_face_segments(mask, quad))
        tris = []
        for cycle in _cycles(segments):
            cycle = _orient(cycle, mask)
            for i in range(1, len(cycle) - 1):
                tris.append((cycle[0], cycle[i], cycle[i + 1]))
        tri_lists.append(tris)
    max_tris = max(len(t) for t in tri_lists)
    table = np.full((256, max_tris * 3), -1, dtype=np.int32)
    counts = np.zeros(256, dtype=np.int32)
    for mask, tris in enumerate(tri_lists):
        counts[mask] = len(tris)
        for i, (a, b, c) in enumerate(tris):
            table[mask, 3 * i : 3 * i + 3] = (a, b, c)
    return table, counts


TRI_TABLE, TRI_COUNT = _build_tables()
