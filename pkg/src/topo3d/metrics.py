"""Volumetric and surface metrics: IoU, Dice, symmetric Hausdorff, volume error.

Hausdorff distances are measured between surface-voxel center point sets,
where a surface voxel is a set voxel with at least one unset 6-neighbor
(the grid border counts as unset). Values are reported in voxel units and in
millimeters via the grid spacing.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grids import BINARY, VoxelGrid, binarize


class UndefinedMetricError(ValueError):
    """Raised when a metric has no value, e.g. Hausdorff of an empty grid."""


def _check_pair(a: VoxelGrid, b: VoxelGrid, need_spacing=False):
    if a.values.shape != b.values.shape:
        raise ValueError(f"grid dimensions differ: {a.values.shape} vs {b.values.shape}")
    if need_spacing and a.spacing_mm != b.spacing_mm:
        raise ValueError(f"grid spacings differ: {a.spacing_mm} vs {b.spacing_mm}")


def _as_bool(g: VoxelGrid):
    if g.kind != BINARY:
        raise ValueError("metric needs binary grids; binarize predictions first")
    return g.values != 0.0


def iou(a: VoxelGrid, b: VoxelGrid) -> float:
    """Intersection over union; 1.0 when both grids are empty."""
    _check_pair(a, b)
    av, bv = _as_bool(a), _as_bool(b)
    union = int(np.count_nonzero(av | bv))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(av & bv)) / union


def dice(a: VoxelGrid, b: VoxelGrid) -> float:
    """Dice coefficient 2|a&b| / (|a|+|b|); 1.0 when both grids are empty."""
    _check_pair(a, b)
    av, bv = _as_bool(a), _as_bool(b)
    total = int(np.count_nonzero(av)) + int(np.count_nonzero(bv))
    if total == 0:
        return 1.0
    return 2 * int(np.count_nonzero(av & bv)) / total


def surface_points(g: VoxelGrid) -> np.ndarray:
    """Centers (voxel-index units, float64) of set voxels with an unset 6-neighbor."""
    v = _as_bool(g)
    padded = np.pad(v, 1)
    core = padded[1:-1, 1:-1, 1:-1]
    open_face = (
        ~padded[:-2, 1:-1, 1:-1]
        | ~padded[2:, 1:-1, 1:-1]
        | ~padded[1:-1, :-2, 1:-1]
        | ~padded[1:-1, 2:, 1:-1]
        | ~padded[1:-1, 1:-1, :-2]
        | ~padded[1:-1, 1:-1, 2:]
    )
    return np.argwhere(core & open_face).astype(np.float64)


def hausdorff(a: VoxelGrid, b: VoxelGrid, percentile: float | None = None, in_mm: bool = False) -> float:
    """Symmetric Hausdorff distance between surface point sets.

    ``percentile`` switches to the (non-default) percentile variant, e.g. 95.
    ``in_mm`` scales point coordinates by the (shared) grid spacing.
    """
    _check_pair(a, b, need_spacing=True)
    pa, pb = surface_points(a), surface_points(b)
    if len(pa) == 0 or len(pb) == 0:
        raise UndefinedMetricError("Hausdorff distance is undefined for an empty grid")
    if in_mm:
        s = np.asarray(a.spacing_mm)
        pa, pb = pa * s, pb * s
    if percentile is None:
        return max(
            float(kernels.directed_hausdorff(pa, pb)),
            float(kernels.directed_hausdorff(pb, pa)),
        )
    d_ab = np.sqrt(kernels.min_dists_sq(pa, pb))
    d_ba = np.sqrt(kernels.min_dists_sq(pb, pa))
    return max(
        float(np.percentile(d_ab, percentile)),
        float(np.percentile(d_ba, percentile)),
    )


def volume_error(v_pred: float, v_gt: float) -> float:
    """Relative absolute volume difference |v_pred - v_gt| / v_gt."""
    if v_gt <= 0:
        raise ValueError(f"ground-truth volume must be positive, got {v_gt}")
    return abs(v_pred - v_gt) / v_gt


@dataclass(frozen=True)
class CaseMetrics:
    case_id: str
    iou: float
    dice: float
    hausdorff_vox: float
    hausdorff_mm: float
    volume_error: float
    hausdorff_defined: bool = True


@dataclass(frozen=True)
class MetricsReport:
    per_case: list[CaseMetrics]
    aggregate: dict = field(default_factory=dict)

    CSV_HEADER = ("id", "iou", "dice", "hausdorff_vox", "hausdorff_mm", "volume_error")

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.CSV_HEADER)
            for c in self.per_case:
                writer.writerow(
                    [
                        c.case_id,
                        f"{c.iou:.6f}",
                        f"{c.dice:.6f}",
                        f"{c.hausdorff_vox:.6f}" if c.hausdorff_defined else "undefined",
                        f"{c.hausdorff_mm:.6f}" if c.hausdorff_defined else "undefined",
                        f"{c.volume_error:.6f}",
                    ]
                )

    def to_table_dict(self) -> dict:
        """Aggregate block shaped like the reconstruction/volume summary tables."""
        return {
            "shape_reconstruction": {
                "iou": self.aggregate["iou"],
                "dice": self.aggregate["dice"],
                "hausdorff_vox": self.aggregate["hausdorff_vox"],
                "hausdorff_mm": self.aggregate["hausdorff_mm"],
            },
            "volume_prediction": {"volume_error": self.aggregate["volume_error"]},
            "cases": len(self.per_case),
            "hausdorff_undefined_cases": self.aggregate["hausdorff_undefined_cases"],
        }

    def write_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_table_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _mean(values):
    vals = [v for v in values if not math.isnan(v)]
    return float(np.mean(vals)) if vals else float("nan")


def evaluate_dataset(
    predictions: dict[str, VoxelGrid],
    ground_truths: dict[str, VoxelGrid],
    threshold: float = 0.5,
) -> MetricsReport:
    """Per-case metrics plus unweighted means, ordered by case id.

    Probability predictions are binarized at ``threshold``. A case whose
    prediction or truth has no surface leaves Hausdorff undefined; such cases
    are flagged and excluded from the Hausdorff means (never silent NaNs).
    """
    if set(predictions) != set(ground_truths):
        missing = set(ground_truths) ^ set(predictions)
        raise ValueError(f"prediction/ground-truth ids differ: {sorted(missing)[:5]}")
    rows = []
    for case_id in sorted(predictions):
        pred = predictions[case_id]
        gt = ground_truths[case_id]
        if pred.kind != BINARY:
            pred = binarize(pred, threshold)
        hd_vox = hd_mm = float("nan")
        defined = True
        try:
            hd_vox = hausdorff(pred, gt)
            hd_mm = hausdorff(pred, gt, in_mm=True)
        except UndefinedMetricError:
            defined = False
        rows.append(
            CaseMetrics(
                case_id=case_id,
                iou=iou(pred, gt),
                dice=dice(pred, gt),
                hausdorff_vox=hd_vox,
                hausdorff_mm=hd_mm,
                volume_error=volume_error(
                    float(np.count_nonzero(pred.values)) * pred.voxel_volume_mm3,
                    float(np.count_nonzero(gt.values)) * gt.voxel_volume_mm3,
                ),
                hausdorff_defined=defined,
            )
        )
    aggregate = {
        "iou": _mean([r.iou for r in rows]),
        "dice": _mean([r.dice for r in rows]),
        "hausdorff_vox": _mean([r.hausdorff_vox for r in rows]),
        "hausdorff_mm": _mean([r.hausdorff_mm for r in rows]),
        "volume_error": _mean([r.volume_error for r in rows]),
        "hausdorff_undefined_cases": sum(not r.hausdorff_defined for r in rows),
    }
    return MetricsReport(per_case=rows, aggregate=aggregate)
