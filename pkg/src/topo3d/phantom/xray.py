"""Scout-image simulation: torso scene assembly and Beer-Lambert ray casting.

The organ sits inside an elliptic-cylinder torso of soft tissue with a
spine-like posterior insert and two lateral bone rods; attenuation
coefficients compose by maximum, so growing the organ never lowers any
voxel's attenuation. Rays are cast parallel to a grid axis; each output
pixel is 1 - I/I0 with I/I0 = exp(-sum mu*step) along the ray, box-filtered
over supersampled sub-rays. Values stay strictly below 1.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..grids import CANONICAL_AXIS, Topogram, TopogramMeta, VoxelGrid, axis_index


@dataclass(frozen=True)
class SceneParams:
    # attenuation coefficients, mm^-1 (representative diagnostic magnitudes)
    mu_air: float = 0.0
    mu_soft_tissue: float = 0.019
    mu_organ: float = 0.021
    mu_bone: float = 0.048
    torso_halfwidth: float = 0.46  # fractions of the grid dimension
    torso_halfdepth: float = 0.38
    spine_radius: float = 0.055
    spine_depth: float = 0.78
    rib_radius: float = 0.04
    rib_halfwidth: float = 0.36

    def __post_init__(self):
        for name in ("mu_air", "mu_soft_tissue", "mu_organ", "mu_bone"):
            if getattr(self, name) < 0:
                raise ValueError(f"attenuation {name} must be nonnegative")


def build_scene(organ: VoxelGrid, params: SceneParams = SceneParams()) -> np.ndarray:
    """Attenuation volume (mm^-1) for an organ grid embedded in a torso."""
    d = organ.dim
    x, y = np.meshgrid(np.arange(d, dtype=np.float64), np.arange(d, dtype=np.float64), indexing="ij")
    cx = cy = (d - 1) / 2.0
    torso2d = ((x - cx) / (params.torso_halfwidth * d)) ** 2 + (
        (y - cy) / (params.torso_halfdepth * d)
    ) ** 2 <= 1.0
    spine2d = (x - cx) ** 2 + (y - params.spine_depth * d) ** 2 <= (params.spine_radius * d) ** 2
    ribs2d = np.zeros_like(spine2d)
    for side in (-1.0, 1.0):
        rx = cx + side * params.rib_halfwidth * d
        ribs2d |= (x - rx) ** 2 + (y - cy) ** 2 <= (params.rib_radius * d) ** 2
    mu2d = np.where(torso2d, params.mu_soft_tissue, params.mu_air)
    mu2d = np.maximum(mu2d, np.where(spine2d | ribs2d, params.mu_bone, 0.0))
    mu = np.repeat(mu2d[:, :, None], d, axis=2)
    return np.maximum(mu, np.where(organ.values != 0.0, params.mu_organ, 0.0))


def simulate_topogram(
    mu: np.ndarray,
    spacing_mm,
    axis: str = CANONICAL_AXIS,
    out_dim: int = 256,
    supersample: int = 2,
    source_intensity: float = 1.0,
    noise_sigma: float = 0.0,
    noise_rng=None,
) -> Topogram:
    """Parallel-beam attenuation image of an attenuation volume."""
    mu = np.asarray(mu, dtype=np.float64)
    if mu.ndim != 3:
        raise ValueError(f"attenuation volume must be 3D, got shape {mu.shape}")
    if float(mu.min()) < 0.0:
        raise ValueError("attenuation coefficients must be nonnegative")
    ax = axis_index(axis)
    order = (ax,) + tuple(a for a in range(3) if a != ax)
    step = float(spacing_mm[ax])
    img = kernels.raycast_attenuation(np.ascontiguousarray(mu.transpose(order)), step, out_dim, supersample)
    if noise_sigma > 0.0:
        rng = noise_rng or np.random.default_rng(0)
        img = img + rng.normal(0.0, noise_sigma, size=img.shape)
    img = np.clip(img, 0.0, 1.0 - 1e-6)
    return Topogram(img.astype(np.float32), meta=TopogramMeta(axis=axis, source_intensity=source_intensity))
