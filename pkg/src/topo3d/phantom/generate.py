"""Procedural organ-like voxel phantoms.

A phantom is a superellipsoid body, optionally unioned with a few smaller
superellipsoid lobes and warped by a smooth low-frequency displacement
field. Sampled shapes must fit the grid with an empty margin shell, occupy
a bounded volume fraction and form a single 6-connected component; sampling
retries with a derived stream until all constraints hold.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..grids import VoxelGrid

_SIX_CONN = ndimage.generate_binary_structure(3, 1)


class PhantomGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class PhantomParams:
    seed: int = 0
    grid_dim: int = 64
    spacing_mm: tuple[float, float, float] = (4.0, 4.0, 4.0)
    # semi-axes as fractions of the grid dimension, sampled uniformly
    semiaxis_range: tuple[float, float] = (0.16, 0.30)
    exponent_range: tuple[float, float] = (2.0, 3.2)
    center_jitter: float = 0.05
    lobe_count_range: tuple[int, int] = (0, 3)
    lobe_scale_range: tuple[float, float] = (0.35, 0.6)
    lobe_offset_range: tuple[float, float] = (0.5, 0.95)
    deformation_amplitude: float = 0.035  # fraction of grid dim, peak displacement
    deformation_cells: int = 4
    margin: int = 2
    volume_fraction: tuple[float, float] = (0.02, 0.40)
    max_retries: int = 32

    def __post_init__(self):
        if self.grid_dim < 8:
            raise ValueError("grid_dim must be at least 8")
        if self.margin < 1:
            raise ValueError("margin must keep at least one empty voxel shell")


def _superellipsoid_field(coords, center, semiaxes, exponent):
    """Membership field; <= 1 inside."""
    x, y, z = coords
    f = (
        np.abs((x - center[0]) / semiaxes[0]) ** exponent
        + np.abs((y - center[1]) / semiaxes[1]) ** exponent
        + np.abs((z - center[2]) / semiaxes[2]) ** exponent
    )
    return f


def superellipsoid_inside(point, center, semiaxes, exponent) -> bool:
    """Scalar membership test for a single point (the analytic reference)."""
    total = 0.0
    for i in range(3):
        total += abs((point[i] - center[i]) / semiaxes[i]) ** exponent
    return total <= 1.0


def _sample_components(rng, p: PhantomParams):
    d = p.grid_dim
    semi = rng.uniform(*p.semiaxis_range, size=3) * d
    center = d / 2.0 + rng.uniform(-p.center_jitter, p.center_jitter, size=3) * d
    comps = [(center, semi, rng.uniform(*p.exponent_range))]
    n_lobes = int(rng.integers(p.lobe_count_range[0], p.lobe_count_range[1] + 1))
    for _ in range(n_lobes):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        offset = direction * rng.uniform(*p.lobe_offset_range) * semi
        scale = rng.uniform(*p.lobe_scale_range)
        comps.append((center + offset, semi * scale, rng.uniform(*p.exponent_range)))
    return comps


def _displacement(rng, p: PhantomParams):
    """Low-frequency per-axis displacement fields on the full grid (voxels)."""
    d = p.grid_dim
    amp = p.deformation_amplitude * d
    if amp == 0.0:
        return None
    coarse = rng.normal(0.0, 1.0, size=(3, p.deformation_cells, p.deformation_cells, p.deformation_cells))
    grid = np.indices((d, d, d), dtype=np.float64) * ((p.deformation_cells - 1) / (d - 1))
    fields = np.stack(
        [ndimage.map_coordinates(coarse[i], grid, order=3, mode="nearest") for i in range(3)]
    )
    peak = np.abs(fields).max()
    if peak > 0:
        fields *= amp / peak
    return fields


def generate_phantom(params: PhantomParams) -> VoxelGrid:
    """Deterministic binary phantom for (params, params.seed)."""
    d = params.grid_dim
    base_coords = np.indices((d, d, d), dtype=np.float64)
    vmin = params.volume_fraction[0] * d**3
    vmax = params.volume_fraction[1] * d**3
    for attempt in range(params.max_retries):
        rng = np.random.default_rng([params.seed, attempt, 0x5EED])
        comps = _sample_components(rng, params)
        disp = _displacement(rng, params)
        coords = base_coords if disp is None else base_coords + disp
        inside = np.zeros((d, d, d), dtype=bool)
        for center, semi, exponent in comps:
            inside |= _superellipsoid_field(coords, center, semi, exponent) <= 1.0
        count = int(inside.sum())
        if count < vmin or count > vmax:
            continue
        m = params.margin
        shell = inside.copy()
        shell[m:-m, m:-m, m:-m] = False
        if shell.any():
            continue
        _, n_comp = ndimage.label(inside, structure=_SIX_CONN)
        if n_comp != 1:
            continue
        return VoxelGrid(inside.astype(np.float32), spacing_mm=params.spacing_mm, kind="binary")
    raise PhantomGenerationError(
        f"no phantom satisfying margin/volume/connectivity constraints after {params.max_retries} tries (seed {params.seed})"
    )
