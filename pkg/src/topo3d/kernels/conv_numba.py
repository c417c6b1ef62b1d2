"""Jitted convolution primitives.

Same contracts as ``conv_numpy``. Loops are arranged so the innermost axis
runs along an output (or input) row, which LLVM can vectorize; each output
element's accumulation order is fixed and independent of the batch size, so
results are bitwise reproducible and batch-invariant.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, fastmath={"reassoc", "contract"}, nogil=True)


@njit(**_JIT)
def _conv2d_fwd(xp, w, stride, y):
    n, co, oh, ow = y.shape
    ci, kh, kw = w.shape[1], w.shape[2], w.shape[3]
    for i in range(n):
        for o in range(co):
            for p in range(oh):
                acc = np.zeros(ow, dtype=y.dtype)
                for c in range(ci):
                    for a in range(kh):
                        xrow = xp[i, c, p * stride + a]
                        wrow = w[o, c, a]
                        for e in range(kw):
                            wv = wrow[e]
                            for r in range(ow):
                                acc[r] += wv * xrow[r * stride + e]
                y[i, o, p] = acc


@njit(**_JIT)
def _conv3d_fwd(xp, w, stride, y):
    n, co, od, oh, ow = y.shape
    ci, kd, kh, kw = w.shape[1], w.shape[2], w.shape[3], w.shape[4]
    for i in range(n):
        for o in range(co):
            for p in range(od):
                for q in range(oh):
                    acc = np.zeros(ow, dtype=y.dtype)
                    for c in range(ci):
                        for a in range(kd):
                            for b in range(kh):
                                xrow = xp[i, c, p * stride + a, q * stride + b]
                                wrow = w[o, c, a, b]
                                for e in range(kw):
                                    wv = wrow[e]
                                    for r in range(ow):
                                        acc[r] += wv * xrow[r * stride + e]
                    y[i, o, p, q] = acc


@njit(**_JIT)
def _conv2d_bwd_x(w, dy, stride, dxp):
    n, co, oh, ow = dy.shape
    ci, kh, kw = w.shape[1], w.shape[2], w.shape[3]
    for i in range(n):
        for c in range(ci):
            for o in range(co):
                for p in range(oh):
                    dyrow = dy[i, o, p]
                    for a in range(kh):
                        xrow = dxp[i, c, p * stride + a]
                        wrow = w[o, c, a]
                        for e in range(kw):
                            wv = wrow[e]
                            for r in range(ow):
                                xrow[r * stride + e] += wv * dyrow[r]


@njit(**_JIT)
def _conv3d_bwd_x(w, dy, stride, dxp):
    n, co, od, oh, ow = dy.shape
    ci, kd, kh, kw = w.shape[1], w.shape[2], w.shape[3], w.shape[4]
    for i in range(n):
        for c in range(ci):
            for o in range(co):
                for p in range(od):
                    for q in range(oh):
                        dyrow = dy[i, o, p, q]
                        for a in range(kd):
                            for b in range(kh):
                                xrow = dxp[i, c, p * stride + a, q * stride + b]
                                wrow = w[o, c, a, b]
                                for e in range(kw):
                                    wv = wrow[e]
                                    for r in range(ow):
                                        xrow[r * stride + e] += wv * dyrow[r]


@njit(**_JIT)
def _conv2d_bwd_w(xp, dy, stride, dw):
    n, co, oh, ow = dy.shape
    ci, kh, kw = dw.shape[1], dw.shape[2], dw.shape[3]
    for i in range(n):
        for o in range(co):
            for c in range(ci):
                for a in range(kh):
                    for e in range(kw):
                        acc = 0.0
                        for p in range(oh):
                            xrow = xp[i, c, p * stride + a]
                            dyrow = dy[i, o, p]
                            for r in range(ow):
                                acc += xrow[r * stride + e] * dyrow[r]
                        dw[o, c, a, e] += acc


@njit(**_JIT)
def _conv3d_bwd_w(xp, dy, stride, dw):
    n, co, od, oh, ow = dy.shape
    ci, kd, kh, kw = dw.shape[1], dw.shape[2], dw.shape[3], dw.shape[4]
    for i in range(n):
        for o in range(co):
            for c in range(ci):
                for a in range(kd):
                    for b in range(kh):
                        for e in range(kw):
                            acc = 0.0
                            for p in range(od):
                                for q in range(oh):
                                    xrow = xp[i, c, p * stride + a, q * stride + b]
                                    dyrow = dy[i, o, p, q]
                                    for r in range(ow):
                                        acc += xrow[r * stride + e] * dyrow[r]
                            dw[o, c, a, b, e] += acc


def _pad_spatial(x, pad):
    if pad == 0:
        return np.ascontiguousarray(x)
    width = [(0, 0), (0, 0)] + [(pad, pad)] * (x.ndim - 2)
    return np.pad(x, width)


def conv2d_forward(x, w, stride, pad):
    n, _, h, wd = x.shape
    co, _, kh, kw = w.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (wd + 2 * pad - kw) // stride + 1
    y = np.empty((n, co, oh, ow), dtype=x.dtype)
    _conv2d_fwd(_pad_spatial(x, pad), np.ascontiguousarray(w), stride, y)
    return y


def conv3d_forward(x, w, stride, pad):
    n, _, d, h, wd = x.shape
    co, _, kd, kh, kw = w.shape
    od = (d + 2 * pad - kd) // stride + 1
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (wd + 2 * pad - kw) // stride + 1
    y = np.empty((n, co, od, oh, ow), dtype=x.dtype)
    _conv3d_fwd(_pad_spatial(x, pad), np.ascontiguousarray(w), stride, y)
    return y


def conv2d_backward_input(w, dy, x_spatial, stride, pad):
    n = dy.shape[0]
    ci = w.shape[1]
    h, wd = x_spatial
    dxp = np.zeros((n, ci, h + 2 * pad, wd + 2 * pad), dtype=dy.dtype)
    _conv2d_bwd_x(np.ascontiguousarray(w), np.ascontiguousarray(dy), stride, dxp)
    if pad == 0:
        return dxp
    return np.ascontiguousarray(dxp[:, :, pad:-pad, pad:-pad])


def conv3d_backward_input(w, dy, x_spatial, stride, pad):
    n = dy.shape[0]
    ci = w.shape[1]
    d, h, wd = x_spatial
    dxp = np.zeros((n, ci, d + 2 * pad, h + 2 * pad, wd + 2 * pad), dtype=dy.dtype)
    _conv3d_bwd_x(np.ascontiguousarray(w), np.ascontiguousarray(dy), stride, dxp)
    if pad == 0:
        return dxp
    return np.ascontiguousarray(dxp[:, :, pad:-pad, pad:-pad, pad:-pad])


def conv2d_backward_weight(x, dy, kernel_hw, stride, pad):
    co = dy.shape[1]
    ci = x.shape[1]
    dw = np.zeros((co, ci) + tuple(kernel_hw), dtype=dy.dtype)
    _conv2d_bwd_w(_pad_spatial(x, pad), np.ascontiguousarray(dy), stride, dw)
    return dw


def conv3d_backward_weight(x, dy, kernel_dhw, stride, pad):
    co = dy.shape[1]
    ci = x.shape[1]
    dw = np.zeros((co, ci) + tuple(kernel_dhw), dtype=dy.dtype)
    _conv3d_bwd_w(_pad_spatial(x, pad), np.ascontiguousarray(dy), stride, dw)
    return dw
