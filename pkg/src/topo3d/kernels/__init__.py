"""Backend dispatch for the hot kernels.

Everything heavier than a numpy one-liner lives here twice (numba / numpy);
the active implementation per kernel family is fixed at import time by
``topo3d.backend`` (geometry/meshing default to the jitted path, convolutions
to the im2col/BLAS path; T3D_BACKEND=numba|numpy forces one side globally).

Transposed convolutions are expressed through the plain-conv primitives:
with conv weights (Cout, Cin, *k) and transposed weights (Cin, Cout, *k),

    convt_forward(x, w)          == conv_backward_input(w, x)
    convt_backward_input(w, dy)  == conv_forward(dy, w)
    convt_backward_weight(x, dy) == conv_backward_weight(x=dy, dy=x)
"""

from .. import backend
from . import conv_numpy, geom_numpy, mc_numpy

if backend.CONV_BACKEND == "numba":
    from . import conv_numba as _conv
else:
    _conv = conv_numpy
if backend.GEOM_BACKEND == "numba":
    from . import geom_numba as _geom
    from . import mc_numba as _mc
else:
    _geom = geom_numpy
    _mc = mc_numpy

conv2d_forward = _conv.conv2d_forward
conv3d_forward = _conv.conv3d_forward
conv2d_backward_input = _conv.conv2d_backward_input
conv3d_backward_input = _conv.conv3d_backward_input
conv2d_backward_weight = _conv.conv2d_backward_weight
conv3d_backward_weight = _conv.conv3d_backward_weight

directed_hausdorff = _geom.directed_hausdorff
min_dists_sq = _geom.min_dists_sq
raycast_attenuation = _geom.raycast_attenuation
emit_triangles = _mc.emit_triangles


def _conv_fns(ndim):
    if ndim == 2:
        return conv2d_forward, conv2d_backward_input, conv2d_backward_weight
    return conv3d_forward, conv3d_backward_input, conv3d_backward_weight


def conv_forward(x, w, stride, pad):
    fwd, _, _ = _conv_fns(x.ndim - 2)
    return fwd(x, w, stride, pad)


def conv_backward_input(w, dy, x_spatial, stride, pad):
    _, bwd_x, _ = _conv_fns(dy.ndim - 2)
    return bwd_x(w, dy, x_spatial, stride, pad)


def conv_backward_weight(x, dy, kernel_shape, stride, pad):
    _, _, bwd_w = _conv_fns(x.ndim - 2)
    return bwd_w(x, dy, kernel_shape, stride, pad)


def convt_forward(x, w, stride, pad):
    k = w.shape[2]
    out = tuple((n - 1) * stride + k - 2 * pad for n in x.shape[2:])
    _, bwd_x, _ = _conv_fns(x.ndim - 2)
    return bwd_x(w, x, out, stride, pad)


def convt_backward_input(w, dy, stride, pad):
    fwd, _, _ = _conv_fns(dy.ndim - 2)
    return fwd(dy, w, stride, pad)


def convt_backward_weight(x, dy, kernel_shape, stride, pad):
    _, _, bwd_w = _conv_fns(x.ndim - 2)
    return bwd_w(dy, x, kernel_shape, stride, pad)
