"""Synthetic dataset assembly: phantoms, topograms, masks and the manifest.

Every case is fully determined by (dataset seed, case index); regenerating
with the same arguments writes byte-identical files. The train/test split is
a seeded shuffle at a 73%/27% ratio.
"""

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..formats import write_grid, write_mask, write_topogram
from ..grids import CANONICAL_AXIS, project_orthographic
from .generate import PhantomParams, generate_phantom
from .xray import SceneParams, build_scene, simulate_topogram

MANIFEST_VERSION = 1
TRAIN_FRACTION = 0.73


def split_counts(n: int, train_fraction: float = TRAIN_FRACTION) -> tuple[int, int]:
    n_train = int(round(n * train_fraction))
    n_train = min(max(n_train, 1), n - 1) if n > 1 else n
    return n_train, n - n_train


def synthesize_dataset(
    n: int,
    seed: int,
    out_dir,
    grid_dim: int = 64,
    topo_dim: int = 256,
    spacing_mm=(4.0, 4.0, 4.0),
    axis: str = CANONICAL_AXIS,
    phantom_params: PhantomParams | None = None,
    scene_params: SceneParams = SceneParams(),
    supersample: int = 2,
    noise_sigma: float = 0.0,
) -> Path:
    """Write n (shape, topogram, mask) triples plus manifest; returns its path."""
    if n <= 0:
        raise ValueError(f"dataset size must be positive, got {n}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base_params = phantom_params or PhantomParams(grid_dim=grid_dim, spacing_mm=tuple(spacing_mm))

    case_seeds = np.random.default_rng([seed, 0]).integers(0, 2**62, size=n)
    n_train, _ = split_counts(n)
    order = np.random.default_rng([seed, 1]).permutation(n)
    split = np.empty(n, dtype=object)
    split[order[:n_train]] = "train"
    split[order[n_train:]] = "test"

    cases = []
    for i in range(n):
        case_id = f"phantom-{i:05d}"
        shape = generate_phantom(replace(base_params, seed=int(case_seeds[i])))
        mask = project_orthographic(shape, axis)
        mu = build_scene(shape, scene_params)
        noise_rng = np.random.default_rng([int(case_seeds[i]), 0xA0])
        topo = simulate_topogram(
            mu,
            shape.spacing_mm,
            axis=axis,
            out_dim=topo_dim,
            supersample=supersample,
            noise_sigma=noise_sigma,
            noise_rng=noise_rng,
        )
        paths = {
            "shape": f"{case_id}.vgrid",
            "topogram": f"{case_id}_topo.pgm",
            "mask": f"{case_id}_mask.pgm",
        }
        write_grid(out_dir / paths["shape"], shape)
        write_topogram(out_dir / paths["topogram"], topo)
        write_mask(out_dir / paths["mask"], mask)
        cases.append({"id": case_id, "seed": int(case_seeds[i]), "split": str(split[i]), "paths": paths})

    ids = [c["id"] for c in cases]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate case ids generated")
    manifest = {
        "version": MANIFEST_VERSION,
        "seed": int(seed),
        "spacing_mm": [float(s) for s in spacing_mm],
        "grid_dim": int(grid_dim),
        "topo_dim": int(topo_dim),
        "axis": axis,
        "cases": cases,
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path
