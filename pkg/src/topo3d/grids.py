"""Voxel grids, silhouette masks, projection images and the projection operators.

Grid values are indexed ``[x, y, z]``. A projection along an axis keeps the
two remaining axes in ``(x, y, z)`` order, so projecting along the canonical
anterior-posterior axis ``y`` yields masks indexed ``[x, z]``. All types are
immutable after construction (the wrapped arrays are marked read-only) and
every operation here is a pure function.
"""

from dataclasses import dataclass, field

import numpy as np

AXES = ("x", "y", "z")
CANONICAL_AXIS = "y"

BINARY = "binary"
PROBABILITY = "probability"

_EPS = 1e-7  # probability clamp used by the losses; mirrored here for binarize docs


def _freeze(values, dtype=np.float32):
    arr = np.asarray(values, dtype=dtype)
    if arr.flags.writeable:
        arr = arr.copy()
        arr.setflags(write=False)
    return arr


def _check_unit_range(arr, what):
    if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
        raise ValueError(f"{what} values must lie in [0, 1]")


def _check_binary(arr, what):
    if arr.size and not np.all((arr == 0.0) | (arr == 1.0)):
        raise ValueError(f"binary {what} may only contain 0 and 1")


@dataclass(frozen=True)
class VoxelGrid:
    """Cubic occupancy volume; binary ground truth or real-valued prediction."""

    values: np.ndarray
    spacing_mm: tuple[float, float, float] = (1.0, 1.0, 1.0)
    kind: str = BINARY

    def __post_init__(self):
        arr = _freeze(self.values)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "spacing_mm", tuple(float(s) for s in self.spacing_mm))
        if arr.ndim != 3 or len(set(arr.shape)) != 1:
            raise ValueError(f"grid must be cubic, got shape {arr.shape}")
        d = arr.shape[0]
        if d < 8 or d > 64 or d & (d - 1):
            raise ValueError(f"grid dimension must be a power of two in [8, 64], got {d}")
        if len(self.spacing_mm) != 3 or any(s <= 0 for s in self.spacing_mm):
            raise ValueError(f"spacing_mm must be three positive reals, got {self.spacing_mm}")
        if self.kind not in (BINARY, PROBABILITY):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        _check_unit_range(arr, "grid")
        if self.kind == BINARY:
            _check_binary(arr, "grid")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing_mm
        return sx * sy * sz


@dataclass(frozen=True)
class Mask2D:
    """2D organ silhouette in the projection plane."""

    values: np.ndarray
    kind: str = BINARY

    def __post_init__(self):
        arr = _freeze(self.values)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2D, got shape {arr.shape}")
        if self.kind not in (BINARY, PROBABILITY):
            raise ValueError(f"unknown mask kind {self.kind!r}")
        _check_unit_range(arr, "mask")
        if self.kind == BINARY:
            _check_binary(arr, "mask")


@dataclass(frozen=True)
class TopogramMeta:
    axis: str = CANONICAL_AXIS
    source_intensity: float = 1.0


@dataclass(frozen=True)
class Topogram:
    """Normalized grayscale scout projection image."""

    values: np.ndarray
    meta: TopogramMeta = field(default_factory=TopogramMeta)

    def __post_init__(self):
        arr = _freeze(self.values)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 2:
            raise ValueError(f"topogram must be 2D, got shape {arr.shape}")
        _check_unit_range(arr, "topogram")


def axis_index(axis) -> int:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    return AXES.index(axis)


def project_orthographic(shape: VoxelGrid, axis: str = CANONICAL_AXIS) -> Mask2D:
    """Per-ray logical OR of a binary grid onto the plane of the other two axes."""
    if shape.kind != BINARY:
        raise ValueError("project_orthographic needs a binary grid; use soft_project for probabilities")
    return Mask2D(shape.values.max(axis=axis_index(axis)), kind=BINARY)


def soft_project_values(values: np.ndarray, axis: int) -> np.ndarray:
    """Complement-product pooling 1 - prod(1 - p) along ``axis`` of a raw array."""
    return 1.0 - np.prod(1.0 - values, axis=axis)


def soft_project_grad(values: np.ndarray, axis: int, dmask: np.ndarray) -> np.ndarray:
    """Backprop through soft_project_values.

    d(out)/d(p_i) is the product of (1 - p_j) over the other ray voxels,
    assembled from exclusive prefix/suffix cumulative products so no division
    by a possibly-zero (1 - p) is needed.
    """
    q = np.moveaxis(1.0 - values, axis, -1)
    n = q.shape[-1]
    prefix = np.ones_like(q)
    suffix = np.ones_like(q)
    np.cumprod(q[..., : n - 1], axis=-1, out=prefix[..., 1:])
    np.cumprod(q[..., :0:-1], axis=-1, out=suffix[..., -2::-1])
    grad = prefix * suffix * np.expand_dims(dmask, -1)
    return np.moveaxis(grad, -1, axis)


def soft_project(shape: VoxelGrid, axis: str = CANONICAL_AXIS) -> Mask2D:
    """Smooth OR along each ray; equals project_orthographic on binary input."""
    return Mask2D(soft_project_values(shape.values.astype(np.float64), axis_index(axis)), kind=PROBABILITY)


def binarize(shape: VoxelGrid, threshold: float) -> VoxelGrid:
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return VoxelGrid(
        (shape.values >= threshold).astype(np.float32),
        spacing_mm=shape.spacing_mm,
        kind=BINARY,
    )


def voxel_volume(shape: VoxelGrid) -> tuple[int, float]:
    """Set-voxel count and the equivalent volume in milliliters."""
    if shape.kind != BINARY:
        raise ValueError("voxel_volume needs a binary grid")
    count = int(np.count_nonzero(shape.values))
    return count, count * shape.voxel_volume_mm3 / 1000.0
