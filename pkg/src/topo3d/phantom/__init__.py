from .dataset import split_counts, synthesize_dataset
from .generate import PhantomGenerationError, PhantomParams, generate_phantom, superellipsoid_inside
from .xray import SceneParams, build_scene, simulate_topogram

__all__ = [
    "PhantomGenerationError",
    "PhantomParams",
    "SceneParams",
    "build_scene",
    "generate_phantom",
    "simulate_topogram",
    "split_counts",
    "superellipsoid_inside",
    "synthesize_dataset",
]
