"""Self-describing checkpoint container.

Layout: 8-byte magic ``T3DCKPT1``, an 8-byte little-endian header length, a
JSON header (variant, dims, seed, epoch, optimizer step, training config,
summary, array manifest), then the named arrays as raw little-endian bytes.
Serialization is canonical (sorted keys, no timestamps), so identical state
produces identical files.
"""

import json
import struct

import numpy as np

from .nets import ModelDims, ReconstructionModel

MAGIC = b"T3DCKPT1"
FORMAT_VERSION = 1


def _manifest(arrays):
    manifest = []
    offset = 0
    for name, arr in arrays:
        nbytes = arr.size * arr.dtype.itemsize
        manifest.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": arr.dtype.name,
                "offset": offset,
                "nbytes": nbytes,
            }
        )
        offset += nbytes
    return manifest


def save_checkpoint(path, model: ReconstructionModel, epoch, config=None, summary=None, optimizer_arrays=(), optimizer_step=0):
    """Write model parameters, batch-norm state and optimizer slots."""
    arrays = [(p.name, p.value) for p in model.parameters()]
    arrays += [(name, buf) for name, buf in model.buffers()]
    arrays += [(name, arr) for name, arr in optimizer_arrays]
    header = {
        "format": MAGIC.decode("ascii"),
        "version": FORMAT_VERSION,
        "variant": model.variant,
        "dims": model.dims.as_dict(),
        "dtype": model.dtype.name,
        "init_scheme": "normal(he-scaled for relu, xavier otherwise), bias zero",
        "seed": model.seed,
        "epoch": int(epoch),
        "optimizer_step": int(optimizer_step),
        "config": config or {},
        "summary": summary or {},
        "arrays": _manifest(arrays),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, arr in arrays:
            fh.write(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())


def _read_header_and_base(path):
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a {MAGIC.decode()} checkpoint")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
    if header.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')}")
    return header, 16 + hlen


def read_header(path) -> dict:
    return _read_header_and_base(path)[0]


def load_arrays(path) -> dict:
    header, base = _read_header_and_base(path)
    out = {}
    with open(path, "rb") as fh:
        for entry in header["arrays"]:
            fh.seek(base + entry["offset"])
            raw = fh.read(entry["nbytes"])
            if len(raw) != entry["nbytes"]:
                raise ValueError(f"{path}: truncated array {entry['name']}")
            dtype = np.dtype(entry["dtype"]).newbyteorder("<")
            out[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(entry["shape"]).astype(entry["dtype"])
    return out


def load_model(path):
    """Rebuild the model from a checkpoint; returns (model, header, arrays)."""
    header = read_header(path)
    arrays = load_arrays(path)
    model = ReconstructionModel(
        variant=header["variant"],
        dims=ModelDims(**header["dims"]),
        seed=header["seed"],
        dtype=np.dtype(header["dtype"]),
    )
    for p in model.parameters():
        if p.name not in arrays:
            raise ValueError(f"{path}: checkpoint is missing parameter {p.name}")
        if tuple(arrays[p.name].shape) != p.value.shape:
            raise ValueError(f"{path}: shape mismatch for {p.name}")
        p.value[...] = arrays[p.name]
    for name, buf in model.buffers():
        if name in arrays:
            buf[...] = arrays[name]
    return model, header, arrays
