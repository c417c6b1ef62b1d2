"""Declarative network architectures and their shape-arithmetic validator.

At production scale the four networks are:

  shape encoder   3D convs on 64^3, kernel 4, pads 1,1,1,1,0, strides
                  2,2,2,2,1, channels 64,128,256,512 then 2*latent
                  (the final layer emits mean and log-variance stacked)
  shape decoder   transposed mirror of the encoder, sigmoid output
  topogram branch 2D convs on 256^2, kernels 11,5,5,5,8, strides 4,2,2,2,1,
                  pads 5,2,2,2,0, channels 64,128,256,512 then latent
  mask branch     2D convs on 64^2, kernel 3, strides 4,2,2,2,2, pads all 1,
                  channels 64,128,256,512 then latent
  combiner        one fully-connected layer 2*latent -> latent

Smaller inputs reuse the same halving patterns with the tail collapsed once
the spatial extent runs out, so reduced-resolution models keep the family's
shape while shrinking depth.
"""

from dataclasses import dataclass

BATCH_NORM = "batch-norm"
NONE = "none"
RELU = "relu"
SIGMOID = "sigmoid"

ROLES = ("shape-encoder", "shape-decoder", "topogram-branch", "mask-branch", "combiner")


@dataclass(frozen=True)
class ConvLayerSpec:
    in_channels: int
    out_channels: int
    kernel: int
    stride: int
    padding: int
    normalization: str = NONE
    activation: str = NONE
    transposed: bool = False

    def out_size(self, n: int) -> int:
        if self.transposed:
            return (n - 1) * self.stride - 2 * self.padding + self.kernel
        return (n + 2 * self.padding - self.kernel) // self.stride + 1


@dataclass(frozen=True)
class NetworkSpec:
    role: str
    ndim: int
    input_channels: int
    input_size: int
    output_channels: int
    output_size: int
    layers: tuple[ConvLayerSpec, ...] = ()
    fc: tuple[int, int] | None = None  # optional fully-connected head (in, out)

    def spatial_chain(self) -> list[int]:
        sizes = [self.input_size]
        for layer in self.layers:
            sizes.append(layer.out_size(sizes[-1]))
        return sizes

    def validate(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown network role {self.role!r}")
        ch = self.input_channels
        size = self.input_size
        for i, layer in enumerate(self.layers):
            if layer.in_channels != ch:
                raise ValueError(f"{self.role} layer {i}: expects {layer.in_channels} channels, chain carries {ch}")
            if not layer.transposed and layer.kernel > size + 2 * layer.padding:
                raise ValueError(f"{self.role} layer {i}: kernel {layer.kernel} exceeds padded input {size + 2 * layer.padding}")
            nxt = layer.out_size(size)
            if nxt <= 0:
                raise ValueError(f"{self.role} layer {i}: non-positive output size {nxt}")
            ch, size = layer.out_channels, nxt
        if self.fc is not None:
            fc_in, fc_out = self.fc
            if self.layers and (size != 1 or ch != fc_in):
                raise ValueError(f"{self.role}: fc head expects {fc_in} features, chain yields {ch}x{size}^{self.ndim}")
            if not self.layers and fc_in != self.input_channels:
                raise ValueError(f"{self.role}: fc head input {fc_in} != declared input {self.input_channels}")
            ch = fc_out
        if ch != self.output_channels or size != self.output_size:
            raise ValueError(
                f"{self.role}: chain yields {ch} channels at size {size}, declared {self.output_channels} at {self.output_size}"
            )


def _halvings(dim: int, floor: int) -> list[int]:
    sizes = []
    while dim > floor:
        dim //= 2
        sizes.append(dim)
    return sizes


def shape_encoder_spec(grid_dim: int = 64, latent_dim: int = 200, base_channels: int = 64) -> NetworkSpec:
    """3D conv chain collapsing a 1-channel grid to stacked (mu, log-var)."""
    layers = []
    ch = 1
    size = grid_dim
    width = base_channels
    while size > 4:
        layers.append(ConvLayerSpec(ch, width, 4, 2, 1, BATCH_NORM, RELU))
        ch, size, width = width, size // 2, width * 2
    layers.append(ConvLayerSpec(ch, 2 * latent_dim, size, 1, 0))
    spec = NetworkSpec("shape-encoder", 3, 1, grid_dim, 2 * latent_dim, 1, tuple(layers))
    spec.validate()
    return spec


def shape_decoder_spec(grid_dim: int = 64, latent_dim: int = 200, base_channels: int = 64) -> NetworkSpec:
    """Transposed mirror of the shape encoder, emitting a probability grid."""
    enc = shape_encoder_spec(grid_dim, latent_dim, base_channels)
    layers = []
    ch = latent_dim
    rev = list(reversed(enc.layers))
    for i, e in enumerate(rev):
        last = i + 1 == len(rev)
        layers.append(
            ConvLayerSpec(
                ch,
                e.in_channels,
                e.kernel,
                e.stride,
                e.padding,
                NONE if last else BATCH_NORM,
                SIGMOID if last else RELU,
                transposed=True,
            )
        )
        ch = e.in_channels
    spec = NetworkSpec("shape-decoder", 3, latent_dim, 1, 1, grid_dim, tuple(layers))
    spec.validate()
    return spec


_TOPO_PATTERN = ((11, 4, 5), (5, 2, 2), (5, 2, 2), (5, 2, 2))


def topogram_encoder_spec(image_dim: int = 256, latent_dim: int = 200, base_channels: int = 64) -> NetworkSpec:
    """2D conv chain mapping a topogram to a latent shape-space vector."""
    layers = []
    ch = 1
    size = image_dim
    width = base_channels
    for kernel, stride, pad in _TOPO_PATTERN:
        nxt = (size + 2 * pad - kernel) // stride + 1
        if nxt < 2:
            break
        layers.append(ConvLayerSpec(ch, width, kernel, stride, pad, BATCH_NORM, RELU))
        ch, size, width = width, nxt, width * 2
    layers.append(ConvLayerSpec(ch, latent_dim, size, 1, 0))
    spec = NetworkSpec("topogram-branch", 2, 1, image_dim, latent_dim, 1, tuple(layers))
    spec.validate()
    return spec


_MASK_STRIDES = (4, 2, 2, 2, 2)


def mask_branch_spec(mask_dim: int = 64, latent_dim: int = 200, base_channels: int = 64) -> NetworkSpec:
    """2D conv chain (kernel 3 throughout) mapping a mask to a latent vector."""
    layers = []
    ch = 1
    size = mask_dim
    width = base_channels
    for stride in _MASK_STRIDES:
        nxt = (size + 2 - 3) // stride + 1
        last = nxt == 1
        layers.append(
            ConvLayerSpec(
                ch,
                latent_dim if last else width,
                3,
                stride,
                1,
                NONE if last else BATCH_NORM,
                NONE if last else RELU,
            )
        )
        ch, size, width = layers[-1].out_channels, nxt, width * 2
        if last:
            break
    if size != 1:
        raise ValueError(f"mask branch cannot reduce {mask_dim} to 1 with strides {_MASK_STRIDES}")
    spec = NetworkSpec("mask-branch", 2, 1, mask_dim, latent_dim, 1, tuple(layers))
    spec.validate()
    return spec


def combiner_spec(latent_dim: int = 200) -> NetworkSpec:
    """Single fully-connected layer fusing topogram and mask features."""
    spec = NetworkSpec(
        "combiner", 2, 2 * latent_dim, 1, latent_dim, 1, (), fc=(2 * latent_dim, latent_dim)
    )
    spec.validate()
    return spec
