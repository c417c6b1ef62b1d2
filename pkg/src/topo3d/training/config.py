"""Training configuration and its JSON file format.

Defaults reproduce the reference protocol: loss weights (50.0, 0.1, 50.0,
0.0001 when a mask stream exists, else 0), Adam at learning rate 0.0001,
250 epochs, batch size 32. Cross-entropy terms are averaged over the batch
(any constant factor is absorbed by the weights).

``reduced()`` is the desk-scale preset: 32^3 grids, 128^2 topograms, 32^2
masks, 64-dim latent, slimmer channel widths.
"""

import json
from dataclasses import asdict, dataclass, field

from ..model.nets import VARIANTS

REFERENCE_ALPHAS = (50.0, 0.1, 50.0, 0.0001)


@dataclass(frozen=True)
class TrainingConfig:
    variant: str = "topogram-only"
    alphas: tuple[float, float, float, float] | None = None
    learning_rate: float = 0.0001
    epochs: int = 250
    batch_size: int = 32
    seed: int = 0
    grid_dim: int = 64
    topo_dim: int = 256
    mask_dim: int = 64
    latent_dim: int = 200
    base_channels: int = 64
    checkpoint_every: int = 50
    init_seed: int | None = None  # parameter/noise stream; defaults to seed
    shuffle_seed: int | None = None  # data-order stream; defaults to seed
    axis: str = "y"
    spacing_mm: tuple[float, float, float] = (4.0, 4.0, 4.0)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.alphas is not None:
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
            if len(self.alphas) != 4 or any(a < 0 for a in self.alphas):
                raise ValueError(f"alphas must be four nonnegative reals, got {self.alphas}")
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        object.__setattr__(self, "spacing_mm", tuple(float(s) for s in self.spacing_mm))

    @property
    def effective_init_seed(self) -> int:
        return self.seed if self.init_seed is None else self.init_seed

    @property
    def effective_shuffle_seed(self) -> int:
        return self.seed if self.shuffle_seed is None else self.shuffle_seed

    @property
    def uses_mask(self) -> bool:
        return self.variant in ("topogram+mask", "mask-only")

    @property
    def uses_topogram(self) -> bool:
        return self.variant in ("topogram-only", "topogram+mask", "no-shape-encoder")

    def effective_alphas(self) -> tuple[float, float, float, float]:
        """Variant-resolved weights; no-shape-encoder zeroes the VAE terms."""
        a = self.alphas
        if a is None:
            a = REFERENCE_ALPHAS if self.uses_mask else REFERENCE_ALPHAS[:3] + (0.0,)
        if self.variant == "no-shape-encoder":
            a = (0.0, 0.0) + tuple(a[2:])
        if not self.uses_mask and a[3] != 0.0:
            raise ValueError(f"variant {self.variant} has no mask stream but alpha_4 = {a[3]}")
        return tuple(float(x) for x in a)

    def dims_dict(self):
        return {
            "grid_dim": self.grid_dim,
            "topo_dim": self.topo_dim,
            "mask_dim": self.mask_dim,
            "latent_dim": self.latent_dim,
            "base_channels": self.base_channels,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["alphas"] = list(self.effective_alphas())
        d["spacing_mm"] = list(self.spacing_mm)
        return d

    @classmethod
    def reduced(cls, **overrides) -> "TrainingConfig":
        base = dict(
            grid_dim=32, topo_dim=128, mask_dim=32, latent_dim=64, base_channels=16
        )
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "alphas" in data and data["alphas"] is not None:
            data = dict(data, alphas=tuple(data["alphas"]))
        if "spacing_mm" in data:
            data = dict(data, spacing_mm=tuple(data["spacing_mm"]))
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "TrainingConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
