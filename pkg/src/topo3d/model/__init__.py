from .nets import ModelDims, ReconstructionModel, soft_project_batch, soft_project_batch_grad
from .specs import (
    ConvLayerSpec,
    NetworkSpec,
    combiner_spec,
    mask_branch_spec,
    shape_decoder_spec,
    shape_encoder_spec,
    topogram_encoder_spec,
)

__all__ = [
    "ConvLayerSpec",
    "ModelDims",
    "NetworkSpec",
    "ReconstructionModel",
    "combiner_spec",
    "mask_branch_spec",
    "shape_decoder_spec",
    "shape_encoder_spec",
    "soft_project_batch",
    "soft_project_batch_grad",
    "topogram_encoder_spec",
]
