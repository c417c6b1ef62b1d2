"""On-disk formats: .vgrid volumes, P5 PGM images, ASCII OBJ meshes.

A .vgrid file is one ASCII header line

    VGRID <D> <D> <D> <sx> <sy> <sz> <kind>\n

followed by D^3 little-endian float32 in x-fastest order. PGM images are
8- or 16-bit binary P5 (16-bit samples big-endian per the netpbm spec),
normalized to [0, 1] on load. OBJ files carry only v/f records, millimeter
units. All three formats round-trip losslessly.
"""

from __future__ import annotations

import numpy as np

from .grids import BINARY, PROBABILITY, Mask2D, Topogram, TopogramMeta, VoxelGrid


class FormatError(Exception):
    """Base class for file-format failures."""


class MalformedHeaderError(FormatError):
    pass


class DimensionMismatchError(FormatError):
    pass


class TruncatedPayloadError(FormatError):
    pass


# ---------------------------------------------------------------------------
# .vgrid


def grid_to_bytes(grid: VoxelGrid) -> bytes:
    sx, sy, sz = grid.spacing_mm
    d = grid.dim
    header = f"VGRID {d} {d} {d} {sx!r} {sy!r} {sz!r} {grid.kind}\n"
    return header.encode("ascii") + np.ascontiguousarray(grid.values.T, dtype="<f4").tobytes()


def grid_from_bytes(data: bytes, name: str = "<bytes>") -> VoxelGrid:
    nl = data.find(b"\n", 0, 256)
    if nl < 0:
        raise MalformedHeaderError(f"{name}: unterminated header line")
    fields = data[:nl].decode("ascii", errors="replace").split()
    if len(fields) != 8 or fields[0] != "VGRID":
        raise MalformedHeaderError(f"{name}: expected 'VGRID dx dy dz sx sy sz kind'")
    try:
        dx, dy, dz = (int(v) for v in fields[1:4])
        spacing = tuple(float(v) for v in fields[4:7])
    except ValueError as exc:
        raise MalformedHeaderError(f"{name}: non-numeric header field") from exc
    kind = fields[7]
    if kind not in (BINARY, PROBABILITY):
        raise MalformedHeaderError(f"{name}: unknown grid kind {kind!r}")
    if not (dx == dy == dz):
        raise DimensionMismatchError(f"{name}: grid must be cubic, header says {dx}x{dy}x{dz}")
    payload = data[nl + 1 :]
    need = dx * dy * dz * 4
    if len(payload) < need:
        raise TruncatedPayloadError(f"{name}: payload holds {len(payload)} bytes, header promises {need}")
    if len(payload) > need:
        raise TruncatedPayloadError(f"{name}: trailing bytes after {need}-byte payload")
    values = np.frombuffer(payload, dtype="<f4").reshape(dz, dy, dx).T
    try:
        return VoxelGrid(values, spacing_mm=spacing, kind=kind)
    except ValueError as exc:
        raise DimensionMismatchError(f"{name}: {exc}") from exc


def write_grid(path, grid: VoxelGrid) -> None:
    with open(path, "wb") as fh:
        fh.write(grid_to_bytes(grid))


def read_grid(path) -> VoxelGrid:
    with open(path, "rb") as fh:
        return grid_from_bytes(fh.read(), name=str(path))


# ---------------------------------------------------------------------------
# PGM (P5)


def image_to_bytes(values: np.ndarray, maxval: int = 255, comment: str | None = None) -> bytes:
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"image must be 2D, got shape {arr.shape}")
    quant = np.clip(np.rint(arr * maxval), 0, maxval)
    raw = quant.astype(">u2" if maxval == 65535 else "u1").tobytes()
    head = b"P5\n"
    if comment:
        head += f"# {comment}\n".encode("ascii")
    head += f"{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    return head + raw


def write_image(path, values: np.ndarray, maxval: int = 255, comment: str | None = None) -> None:
    with open(path, "wb") as fh:
        fh.write(image_to_bytes(values, maxval=maxval, comment=comment))


def image_from_bytes(data: bytes, name: str = "<bytes>") -> tuple[np.ndarray, str | None]:
    """Parse a P5 PGM; returns (values in [0,1] float32, first comment or None)."""
    path = name
    if not data.startswith(b"P5"):
        raise MalformedHeaderError(f"{path}: not a binary PGM (P5) file")
    pos = 2
    comment = None
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise MalformedHeaderError(f"{path}: header ended early")
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise MalformedHeaderError(f"{path}: unterminated comment")
            text = data[pos + 1 : end].decode("ascii", errors="replace").strip()
            if comment is None:
                comment = text
            pos = end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise MalformedHeaderError(f"{path}: non-numeric PGM header field") from exc
    if width <= 0 or height <= 0:
        raise DimensionMismatchError(f"{path}: bad image dimensions {width}x{height}")
    if maxval not in (255, 65535):
        raise MalformedHeaderError(f"{path}: unsupported maxval {maxval}")
    itemsize = 2 if maxval == 65535 else 1
    need = width * height * itemsize
    raw = data[pos:]
    if len(raw) < need:
        raise TruncatedPayloadError(f"{path}: payload holds {len(raw)} bytes, header promises {need}")
    if len(raw) > need:
        raise TruncatedPayloadError(f"{path}: trailing bytes after {need}-byte payload")
    pixels = np.frombuffer(raw, dtype=">u2" if itemsize == 2 else "u1").reshape(height, width)
    return (pixels.astype(np.float32) / maxval), comment


def read_image(path) -> tuple[np.ndarray, str | None]:
    with open(path, "rb") as fh:
        return image_from_bytes(fh.read(), name=str(path))


def mask_to_bytes(mask: Mask2D) -> bytes:
    return image_to_bytes(mask.values, maxval=255)


def mask_from_bytes(data: bytes, name: str = "<bytes>") -> Mask2D:
    values, _ = image_from_bytes(data, name)
    kind = BINARY if np.all((values == 0.0) | (values == 1.0)) else PROBABILITY
    return Mask2D(values, kind=kind)


def write_mask(path, mask: Mask2D) -> None:
    with open(path, "wb") as fh:
        fh.write(mask_to_bytes(mask))


def read_mask(path) -> Mask2D:
    with open(path, "rb") as fh:
        return mask_from_bytes(fh.read(), name=str(path))


def topogram_to_bytes(topo: Topogram) -> bytes:
    meta = f"topo3d axis={topo.meta.axis} source_intensity={topo.meta.source_intensity!r}"
    return image_to_bytes(topo.values, maxval=65535, comment=meta)


def topogram_from_bytes(data: bytes, name: str = "<bytes>") -> Topogram:
    values, comment = image_from_bytes(data, name)
    meta = TopogramMeta()
    if comment and comment.startswith("topo3d"):
        kv = dict(part.split("=", 1) for part in comment.split()[1:] if "=" in part)
        meta = TopogramMeta(
            axis=kv.get("axis", meta.axis),
            source_intensity=float(kv.get("source_intensity", meta.source_intensity)),
        )
    return Topogram(values, meta=meta)


def write_topogram(path, topo: Topogram) -> None:
    with open(path, "wb") as fh:
        fh.write(topogram_to_bytes(topo))


def read_topogram(path) -> Topogram:
    with open(path, "rb") as fh:
        return topogram_from_bytes(fh.read(), name=str(path))


# ---------------------------------------------------------------------------
# OBJ


def mesh_to_text(mesh) -> str:
    lines = ["# topo3d mesh, millimeter units\n"]
    for v in mesh.vertices:
        lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
    for t in mesh.triangles:
        lines.append(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")
    return "".join(lines)


def write_mesh(path, mesh) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(mesh_to_text(mesh))


def read_mesh(path):
    from .meshes import TriangleMesh

    vertices = []
    triangles = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "v" and len(parts) == 4:
                try:
                    vertices.append([float(p) for p in parts[1:]])
                except ValueError as exc:
                    raise MalformedHeaderError(f"{path}:{lineno}: bad vertex record") from exc
            elif parts[0] == "f" and len(parts) == 4:
                try:
                    idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                except ValueError as exc:
                    raise MalformedHeaderError(f"{path}:{lineno}: bad face record") from exc
                if any(i < 0 for i in idx):
                    raise MalformedHeaderError(f"{path}:{lineno}: face index < 1")
                triangles.append(idx)
            else:
                raise MalformedHeaderError(f"{path}:{lineno}: unsupported OBJ record {parts[0]!r}")
    verts = np.asarray(vertices, dtype=np.float64).reshape(len(vertices), 3)
    tris = np.asarray(triangles, dtype=np.int32).reshape(len(triangles), 3)
    if tris.size and int(tris.max()) >= len(verts):
        raise DimensionMismatchError(f"{path}: face references vertex {int(tris.max()) + 1} of {len(verts)}")
    return TriangleMesh(verts, tris)
