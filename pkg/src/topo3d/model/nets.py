"""Model assembly: the shape VAE and the observation encoders.

Weights are created from a seeded generator in a fixed construction order, so
a given (seed, dims) pair always yields bit-identical parameters. Inference
uses the posterior mean (no sampling) and batch-norm running statistics.
"""

from dataclasses import dataclass, field

import numpy as np

from ..grids import axis_index, soft_project_grad, soft_project_values
from . import specs
from .layers import BatchNorm, Conv, Dense, Param, ReLU, Sigmoid

VARIANTS = ("topogram-only", "topogram+mask", "mask-only", "no-shape-encoder")

LOG_VAR_CLAMP = 10.0


@dataclass(frozen=True)
class ModelDims:
    grid_dim: int = 64
    topo_dim: int = 256
    mask_dim: int = 64
    latent_dim: int = 200
    base_channels: int = 64

    def as_dict(self):
        return {
            "grid_dim": self.grid_dim,
            "topo_dim": self.topo_dim,
            "mask_dim": self.mask_dim,
            "latent_dim": self.latent_dim,
            "base_channels": self.base_channels,
        }


class SequentialNet:
    def __init__(self, name, spec: specs.NetworkSpec, rng, dtype):
        spec.validate()
        self.name = name
        self.spec = spec
        self.layers = []
        for i, ls in enumerate(spec.layers):
            gain = np.sqrt(2.0) if ls.activation == specs.RELU else 1.0
            self.layers.append(
                Conv(
                    f"{name}.conv{i}", ls.in_channels, ls.out_channels, ls.kernel,
                    ls.stride, ls.padding, spec.ndim, ls.transposed, gain, rng, dtype,
                )
            )
            if ls.normalization == specs.BATCH_NORM:
                self.layers.append(BatchNorm(f"{name}.bn{i}", ls.out_channels, dtype=dtype))
            if ls.activation == specs.RELU:
                self.layers.append(ReLU())
            elif ls.activation == specs.SIGMOID:
                self.layers.append(Sigmoid())
        if spec.fc is not None:
            self.layers.append(Dense(f"{name}.fc", spec.fc[0], spec.fc[1], 1.0, rng, dtype))

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def buffers(self):
        return [b for layer in self.layers for b in layer.buffers()]

    def forward(self, x, training):
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, training)
            caches.append(cache)
        return x, caches

    def backward(self, caches, dy):
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            dy = layer.backward(cache, dy)
        return dy


class ReconstructionModel:
    """Shape VAE plus variant-dependent observation encoders."""

    def __init__(self, variant="topogram-only", dims: ModelDims | None = None, seed: int = 0, dtype=np.float32):
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
        self.variant = variant
        self.dims = dims or ModelDims()
        self.dtype = np.dtype(dtype)
        self.seed = int(seed)
        d = self.dims
        rng = np.random.default_rng([self.seed, 0x70D0])
        self.encoder = SequentialNet(
            "q", specs.shape_encoder_spec(d.grid_dim, d.latent_dim, d.base_channels), rng, self.dtype
        )
        self.decoder = SequentialNet(
            "p", specs.shape_decoder_spec(d.grid_dim, d.latent_dim, d.base_channels), rng, self.dtype
        )
        self.topo_net = None
        self.mask_net = None
        self.combiner = None
        if self.uses_topogram:
            self.topo_net = SequentialNet(
                "topo", specs.topogram_encoder_spec(d.topo_dim, d.latent_dim, d.base_channels), rng, self.dtype
            )
        if self.uses_mask:
            self.mask_net = SequentialNet(
                "mask", specs.mask_branch_spec(d.mask_dim, d.latent_dim, d.base_channels), rng, self.dtype
            )
        if variant == "topogram+mask":
            self.combiner = SequentialNet("comb", specs.combiner_spec(d.latent_dim), rng, self.dtype)

    @property
    def uses_topogram(self) -> bool:
        return self.variant in ("topogram-only", "topogram+mask", "no-shape-encoder")

    @property
    def uses_mask(self) -> bool:
        return self.variant in ("topogram+mask", "mask-only")

    @property
    def trains_shape_encoder(self) -> bool:
        return self.variant != "no-shape-encoder"

    def networks(self):
        nets = [("q", self.encoder), ("p", self.decoder)]
        if self.topo_net is not None:
            nets.append(("topo", self.topo_net))
        if self.mask_net is not None:
            nets.append(("mask", self.mask_net))
        if self.combiner is not None:
            nets.append(("comb", self.combiner))
        return nets

    def network_specs(self):
        return {name: net.spec for name, net in self.networks()}

    def parameters(self) -> list[Param]:
        return [p for _, net in self.networks() for p in net.params()]

    def buffers(self):
        return [b for _, net in self.networks() for b in net.buffers()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    # ------------------------------------------------------------------
    # forward pieces

    def encode_shape(self, s, training):
        """Map (N,1,D,D,D) grids to posterior (mu, log_var), each (N, latent)."""
        out, cache = self.encoder.forward(np.asarray(s, dtype=self.dtype), training)
        flat = out.reshape(out.shape[0], -1)
        lat = self.dims.latent_dim
        mu = flat[:, :lat]
        log_var_raw = flat[:, lat:]
        log_var = np.clip(log_var_raw, -LOG_VAR_CLAMP, LOG_VAR_CLAMP)
        clamp_mask = (log_var_raw > -LOG_VAR_CLAMP) & (log_var_raw < LOG_VAR_CLAMP)
        return mu, log_var, (cache, out.shape, clamp_mask)

    def encode_shape_backward(self, enc_cache, dmu, dlog_var):
        cache, out_shape, clamp_mask = enc_cache
        dflat = np.concatenate([dmu, dlog_var * clamp_mask], axis=1).astype(self.dtype)
        return self.encoder.backward(cache, dflat.reshape(out_shape))

    @staticmethod
    def reparameterize(mu, log_var, noise):
        """z = mu + exp(log_var / 2) * noise."""
        return mu + np.exp(0.5 * log_var) * noise

    def decode(self, z, training):
        """Map (N, latent) codes to (N,1,D,D,D) probability grids."""
        z = np.asarray(z, dtype=self.dtype)
        x = z.reshape(z.shape[0], self.dims.latent_dim, 1, 1, 1)
        y, cache = self.decoder.forward(x, training)
        return y, cache

    def decode_backward(self, cache, dy):
        dz = self.decoder.backward(cache, dy.astype(self.dtype))
        return dz.reshape(dz.shape[0], self.dims.latent_dim)

    def encode_observation(self, topo, mask, training):
        """Variant-dependent latent from topogram and/or mask batches."""
        caches = {}
        if self.variant in ("topogram-only", "no-shape-encoder"):
            out, caches["topo"] = self.topo_net.forward(np.asarray(topo, dtype=self.dtype), training)
            z = out.reshape(out.shape[0], -1)
        elif self.variant == "mask-only":
            out, caches["mask"] = self.mask_net.forward(np.asarray(mask, dtype=self.dtype), training)
            z = out.reshape(out.shape[0], -1)
        else:
            v1, caches["topo"] = self.topo_net.forward(np.asarray(topo, dtype=self.dtype), training)
            v2, caches["mask"] = self.mask_net.forward(np.asarray(mask, dtype=self.dtype), training)
            v1 = v1.reshape(v1.shape[0], -1)
            v2 = v2.reshape(v2.shape[0], -1)
            joint = np.concatenate([v1, v2], axis=1)
            z, caches["comb"] = self.combiner.forward(joint, training)
            caches["split"] = (v1.shape[1], v1.shape + (1, 1), v2.shape + (1, 1))
        return z, caches

    def encode_observation_backward(self, caches, dz):
        dz = dz.astype(self.dtype)
        lat = self.dims.latent_dim
        if self.variant in ("topogram-only", "no-shape-encoder"):
            self.topo_net.backward(caches["topo"], dz.reshape(dz.shape[0], lat, 1, 1))
        elif self.variant == "mask-only":
            self.mask_net.backward(caches["mask"], dz.reshape(dz.shape[0], lat, 1, 1))
        else:
            djoint = self.combiner.backward(caches["comb"], dz)
            split, s1, s2 = caches["split"]
            self.topo_net.backward(caches["topo"], djoint[:, :split].reshape(s1))
            self.mask_net.backward(caches["mask"], djoint[:, split:].reshape(s2))

    # ------------------------------------------------------------------
    # inference

    def predict(self, topo=None, mask=None):
        """Deterministic probability grids from observations (inference mode)."""
        if self.uses_topogram and topo is None:
            raise ValueError(f"variant {self.variant} needs a topogram")
        if self.uses_mask and mask is None:
            raise ValueError(f"variant {self.variant} needs a mask")
        z, _ = self.encode_observation(topo, mask, training=False)
        y, _ = self.decode(z, training=False)
        return y

    def reconstruct_shapes(self, s):
        """VAE reconstruction via the posterior mean (inference mode)."""
        mu, _, _ = self.encode_shape(s, training=False)
        y, _ = self.decode(mu, training=False)
        return y

def soft_project_batch(probs, axis: str):
    """1 - prod(1 - p) along a named axis for (N,1,D,D,D) batches."""
    return soft_project_values(probs, 2 + axis_index(axis))


def soft_project_batch_grad(probs, axis: str, dmask):
    return soft_project_grad(probs, 2 + axis_index(axis), dmask)
