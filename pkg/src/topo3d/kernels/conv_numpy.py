"""Pure-numpy convolution primitives (im2col/col2im over BLAS matmul).

Three primitives per dimensionality: forward, backward-input, backward-weight.
Transposed convolutions are the same primitives with input/output roles
swapped, see ``kernels/__init__.py``.

Batch samples are processed one at a time to bound the im2col buffer size.
Weights for a direct conv are (Cout, Cin, *k); spatial padding is symmetric.
"""

import numpy as np


def _pad_spatial(x, pad):
    if pad == 0:
        return x
    width = [(0, 0), (0, 0)] + [(pad, pad)] * (x.ndim - 2)
    return np.pad(x, width)


def _out_size(n, k, s, p):
    return (n + 2 * p - k) // s + 1


def _im2col2d(xp, kh, kw, s, oh, ow):
    c = xp.shape[0]
    cols = np.empty((c, kh, kw, oh, ow), dtype=xp.dtype)
    for a in range(kh):
        for b in range(kw):
            cols[:, a, b] = xp[:, a : a + oh * s : s, b : b + ow * s : s]
    return cols.reshape(c * kh * kw, oh * ow)


def _im2col3d(xp, kd, kh, kw, s, od, oh, ow):
    c = xp.shape[0]
    cols = np.empty((c, kd, kh, kw, od, oh, ow), dtype=xp.dtype)
    for a in range(kd):
        for b in range(kh):
            for e in range(kw):
                cols[:, a, b, e] = xp[
                    :, a : a + od * s : s, b : b + oh * s : s, e : e + ow * s : s
                ]
    return cols.reshape(c * kd * kh * kw, od * oh * ow)


def conv2d_forward(x, w, stride, pad):
    n, _, h, wd = x.shape
    co, ci, kh, kw = w.shape
    oh, ow = _out_size(h, kh, stride, pad), _out_size(wd, kw, stride, pad)
    xp = _pad_spatial(x, pad)
    wm = w.reshape(co, ci * kh * kw)
    y = np.empty((n, co, oh, ow), dtype=x.dtype)
    for i in range(n):
        y[i] = (wm @ _im2col2d(xp[i], kh, kw, stride, oh, ow)).reshape(co, oh, ow)
    return y


def conv3d_forward(x, w, stride, pad):
    n, _, d, h, wd = x.shape
    co, ci, kd, kh, kw = w.shape
    od = _out_size(d, kd, stride, pad)
    oh = _out_size(h, kh, stride, pad)
    ow = _out_size(wd, kw, stride, pad)
    xp = _pad_spatial(x, pad)
    wm = w.reshape(co, ci * kd * kh * kw)
    y = np.empty((n, co, od, oh, ow), dtype=x.dtype)
    for i in range(n):
        y[i] = (wm @ _im2col3d(xp[i], kd, kh, kw, stride, od, oh, ow)).reshape(
            co, od, oh, ow
        )
    return y


def conv2d_backward_input(w, dy, x_spatial, stride, pad):
    n, co, oh, ow = dy.shape
    _, ci, kh, kw = w.shape
    h, wd = x_spatial
    wm = w.reshape(co, -1)
    dxp = np.zeros((n, ci, h + 2 * pad, wd + 2 * pad), dtype=dy.dtype)
    for i in range(n):
        dcols = (wm.T @ dy[i].reshape(co, -1)).reshape(ci, kh, kw, oh, ow)
        for a in range(kh):
            for b in range(kw):
                dxp[i, :, a : a + oh * stride : stride, b : b + ow * stride : stride] += dcols[
                    :, a, b
                ]
    if pad == 0:
        return dxp
    return dxp[:, :, pad:-pad, pad:-pad]


def conv3d_backward_input(w, dy, x_spatial, stride, pad):
    n, co, od, oh, ow = dy.shape
    _, ci, kd, kh, kw = w.shape
    d, h, wd = x_spatial
    wm = w.reshape(co, -1)
    dxp = np.zeros((n, ci, d + 2 * pad, h + 2 * pad, wd + 2 * pad), dtype=dy.dtype)
    for i in range(n):
        dcols = (wm.T @ dy[i].reshape(co, -1)).reshape(ci, kd, kh, kw, od, oh, ow)
        for a in range(kd):
            for b in range(kh):
                for e in range(kw):
                    dxp[
                        i,
                        :,
                        a : a + od * stride : stride,
                        b : b + oh * stride : stride,
                        e : e + ow * stride : stride,
                    ] += dcols[:, a, b, e]
    if pad == 0:
        return dxp
    return dxp[:, :, pad:-pad, pad:-pad, pad:-pad]


def conv2d_backward_weight(x, dy, kernel_hw, stride, pad):
    n, co, oh, ow = dy.shape
    ci = x.shape[1]
    kh, kw = kernel_hw
    xp = _pad_spatial(x, pad)
    dw = np.zeros((co, ci * kh * kw), dtype=dy.dtype)
    for i in range(n):
        dw += dy[i].reshape(co, -1) @ _im2col2d(xp[i], kh, kw, stride, oh, ow).T
    return dw.reshape(co, ci, kh, kw)


def conv3d_backward_weight(x, dy, kernel_dhw, stride, pad):
    n, co, od, oh, ow = dy.shape
    ci = x.shape[1]
    kd, kh, kw = kernel_dhw
    xp = _pad_spatial(x, pad)
    dw = np.zeros((co, ci * kd * kh * kw), dtype=dy.dtype)
    for i in range(n):
        dw += dy[i].reshape(co, -1) @ _im2col3d(xp[i], kd, kh, kw, stride, od, oh, ow).T
    return dw.reshape(co, ci, kd, kh, kw)
