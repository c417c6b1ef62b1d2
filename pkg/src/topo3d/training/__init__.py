from .config import TrainingConfig
from .data import DatasetSplit, ExampleSource, load_manifest, split_from_manifest
from .loop import (
    TrainingDivergedError,
    TrainingLog,
    VariantMismatchError,
    evaluate_checkpoint,
    joint_step,
    predict,
    predict_batch,
    run_ablation,
    train,
)
from .optim import Adam

__all__ = [
    "Adam",
    "DatasetSplit",
    "ExampleSource",
    "TrainingConfig",
    "TrainingDivergedError",
    "TrainingLog",
    "VariantMismatchError",
    "evaluate_checkpoint",
    "joint_step",
    "load_manifest",
    "predict",
    "predict_batch",
    "run_ablation",
    "split_from_manifest",
    "train",
]
