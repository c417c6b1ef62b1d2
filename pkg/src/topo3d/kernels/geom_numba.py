"""Jitted geometry kernels, contracts matching ``geom_numpy``."""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _directed_hausdorff(a_pts, b_pts):
    worst = 0.0
    for i in range(a_pts.shape[0]):
        ax, ay, az = a_pts[i, 0], a_pts[i, 1], a_pts[i, 2]
        best = np.inf
        for j in range(b_pts.shape[0]):
            dx = ax - b_pts[j, 0]
            dy = ay - b_pts[j, 1]
            dz = az - b_pts[j, 2]
            d = dx * dx + dy * dy + dz * dz
            if d < best:
                best = d
                if best <= worst:
                    break
        if best > worst:
            worst = best
    return np.sqrt(worst)


@njit(**_JIT)
def _min_dists_sq(a_pts, b_pts):
    out = np.empty(a_pts.shape[0])
    for i in range(a_pts.shape[0]):
        ax, ay, az = a_pts[i, 0], a_pts[i, 1], a_pts[i, 2]
        best = np.inf
        for j in range(b_pts.shape[0]):
            dx = ax - b_pts[j, 0]
            dy = ay - b_pts[j, 1]
            dz = az - b_pts[j, 2]
            d = dx * dx + dy * dy + dz * dz
            if d < best:
                best = d
        out[i] = best
    return out


@njit(**_JIT)
def _raycast(mu, step_mm, out_n, supersample, img):
    nray, nu, nv = mu.shape
    s = out_n * supersample
    scale_u = nu / s
    scale_v = nv / s
    inv_ss2 = 1.0 / (supersample * supersample)
    for i in range(s):
        u = (i + 0.5) * scale_u - 0.5
        u0 = int(np.floor(u))
        if u0 < 0:
            u0 = 0
        if u0 > nu - 2:
            u0 = nu - 2
        fu = u - u0
        if fu < 0.0:
            fu = 0.0
        if fu > 1.0:
            fu = 1.0
        for j in range(s):
            v = (j + 0.5) * scale_v - 0.5
            v0 = int(np.floor(v))
            if v0 < 0:
                v0 = 0
            if v0 > nv - 2:
                v0 = nv - 2
            fv = v - v0
            if fv < 0.0:
                fv = 0.0
            if fv > 1.0:
                fv = 1.0
            w00 = (1.0 - fu) * (1.0 - fv)
            w01 = (1.0 - fu) * fv
            w10 = fu * (1.0 - fv)
            w11 = fu * fv
            depth = 0.0
            for t in range(nray):
                depth += (
                    w00 * mu[t, u0, v0]
                    + w01 * mu[t, u0, v0 + 1]
                    + w10 * mu[t, u0 + 1, v0]
                    + w11 * mu[t, u0 + 1, v0 + 1]
                )
            val = 1.0 - np.exp(-depth * step_mm)
            img[i // supersample, j // supersample] += val * inv_ss2


def directed_hausdorff(a_pts, b_pts):
    return _directed_hausdorff(np.ascontiguousarray(a_pts), np.ascontiguousarray(b_pts))


def min_dists_sq(a_pts, b_pts):
    return _min_dists_sq(np.ascontiguousarray(a_pts), np.ascontiguousarray(b_pts))


def raycast_attenuation(mu, step_mm, out_n, supersample):
    img = np.zeros((out_n, out_n))
    _raycast(np.ascontiguousarray(mu, dtype=np.float64), step_mm, out_n, supersample, img)
    return img
