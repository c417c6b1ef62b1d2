"""Dataset manifests, splits and in-memory example batches."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..formats import read_grid, read_mask, read_topogram


@dataclass(frozen=True)
class DatasetSplit:
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    manifest_path: str

    def __post_init__(self):
        if set(self.train_ids) & set(self.test_ids):
            raise ValueError("train/test ids overlap")
        if not self.train_ids or not self.test_ids:
            raise ValueError("both splits must be non-empty")


def load_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    for key in ("version", "seed", "spacing_mm", "cases"):
        if key not in manifest:
            raise ValueError(f"{path}: manifest is missing {key!r}")
    return manifest


def split_from_manifest(path) -> DatasetSplit:
    manifest = load_manifest(path)
    train = tuple(c["id"] for c in manifest["cases"] if c["split"] == "train")
    test = tuple(c["id"] for c in manifest["cases"] if c["split"] == "test")
    return DatasetSplit(train, test, str(path))


class ExampleSource:
    """Loads (shape, topogram, mask) triples from a manifest into memory."""

    def __init__(self, manifest_path):
        self.manifest_path = Path(manifest_path)
        self.manifest = load_manifest(manifest_path)
        self.root = self.manifest_path.parent
        self.spacing_mm = tuple(float(s) for s in self.manifest["spacing_mm"])
        self._cases = {c["id"]: c for c in self.manifest["cases"]}

    def ids(self, split=None):
        out = [c["id"] for c in self.manifest["cases"] if split is None or c["split"] == split]
        return sorted(out)

    def load_batch(self, ids, need_topo=True, need_mask=True, need_shape=True):
        """Stacked float32 arrays keyed shape/topo/mask, channel axis added."""
        missing = [i for i in ids if i not in self._cases]
        if missing:
            raise KeyError(f"manifest {self.manifest_path} has no cases {missing[:5]}")
        shapes, topos, masks = [], [], []
        for case_id in ids:
            case = self._cases[case_id]
            paths = case["paths"]
            if need_shape:
                shapes.append(read_grid(self.root / paths["shape"]).values)
            if need_topo:
                topos.append(read_topogram(self.root / paths["topogram"]).values)
            if need_mask:
                masks.append(read_mask(self.root / paths["mask"]).values)
        out = {"ids": list(ids)}
        if need_shape:
            out["shape"] = np.stack(shapes).astype(np.float32)[:, None]
        if need_topo:
            out["topo"] = np.stack(topos).astype(np.float32)[:, None]
        if need_mask:
            out["mask"] = np.stack(masks).astype(np.float32)[:, None]
        return out
