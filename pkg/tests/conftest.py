import numpy as np
import pytest

from topo3d.grids import VoxelGrid
from topo3d.phantom import synthesize_dataset
from topo3d.training import ExampleSource, TrainingConfig, train


def random_binary_grid(rng, dim=8, density=0.35, spacing=(1.0, 1.0, 1.0)):
    return VoxelGrid((rng.random((dim, dim, dim)) < density).astype(np.float32), spacing, "binary")


TINY_TRAIN_KW = dict(
    epochs=4,
    batch_size=4,
    seed=5,
    grid_dim=32,
    topo_dim=128,
    mask_dim=32,
    latent_dim=16,
    base_channels=4,
    checkpoint_every=0,
    learning_rate=0.001,
)


@pytest.fixture(scope="session")
def dataset32(tmp_path_factory):
    """Eight 32^3 phantom cases with manifest (6 train / 2 test)."""
    out = tmp_path_factory.mktemp("data32")
    manifest = synthesize_dataset(8, seed=7, out_dir=out, grid_dim=32, topo_dim=128)
    return manifest


@pytest.fixture(scope="session")
def source32(dataset32):
    return ExampleSource(dataset32)


@pytest.fixture(scope="session")
def topo_ckpt(tmp_path_factory, source32):
    """Briefly-trained topogram-only checkpoint (plumbing tests, not quality)."""
    out = tmp_path_factory.mktemp("ckpt") / "topo_only.ckpt"
    config = TrainingConfig(variant="topogram-only", **TINY_TRAIN_KW)
    train(config, source32, out)
    return out


@pytest.fixture(scope="session")
def mask_ckpt(tmp_path_factory, source32):
    """Briefly-trained topogram+mask checkpoint."""
    out = tmp_path_factory.mktemp("ckpt_mask") / "topo_mask.ckpt"
    config = TrainingConfig(variant="topogram+mask", **TINY_TRAIN_KW)
    train(config, source32, out)
    return out
