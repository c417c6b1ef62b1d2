"""Pure-numpy geometry kernels: directed Hausdorff and attenuation ray casting."""

import numpy as np


def directed_hausdorff(a_pts, b_pts):
    """max over a of min over b of euclidean distance; inputs (n,3) float64."""
    worst = 0.0
    # chunk the outer set to bound the (chunk, m) distance matrix
    chunk = max(1, int(2_000_000 // max(len(b_pts), 1)))
    for lo in range(0, len(a_pts), chunk):
        d2 = ((a_pts[lo : lo + chunk, None, :] - b_pts[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, float(d2.min(axis=1).max()))
    return np.sqrt(worst)


def min_dists_sq(a_pts, b_pts):
    """Per-point squared distance from each point of a to the nearest point of b."""
    out = np.empty(len(a_pts))
    chunk = max(1, int(2_000_000 // max(len(b_pts), 1)))
    for lo in range(0, len(a_pts), chunk):
        d2 = ((a_pts[lo : lo + chunk, None, :] - b_pts[None, :, :]) ** 2).sum(axis=2)
        out[lo : lo + chunk] = d2.min(axis=1)
    return out


def raycast_attenuation(mu, step_mm, out_n, supersample):
    """Parallel-beam optical depth through ``mu`` (ray axis first, mm^-1).

    Returns a (out_n, out_n) image of 1 - exp(-depth), box-filtered over
    supersample^2 sub-rays per pixel. Lateral sampling is bilinear with
    clamped borders; the ray integrates one sample per voxel plane, each
    weighted by ``step_mm``.
    """
    nray, nu, nv = mu.shape
    s = out_n * supersample
    scale_u = nu / s
    scale_v = nv / s
    u = (np.arange(s) + 0.5) * scale_u - 0.5
    v = (np.arange(s) + 0.5) * scale_v - 0.5
    u0 = np.clip(np.floor(u).astype(np.int64), 0, nu - 2) if nu > 1 else np.zeros(s, np.int64)
    v0 = np.clip(np.floor(v).astype(np.int64), 0, nv - 2) if nv > 1 else np.zeros(s, np.int64)
    fu = np.clip(u - u0, 0.0, 1.0)
    fv = np.clip(v - v0, 0.0, 1.0)
    wu0, wu1 = (1.0 - fu)[:, None], fu[:, None]
    wv0, wv1 = (1.0 - fv)[None, :], fv[None, :]
    depth = np.zeros((s, s))
    for t in range(nray):
        plane = mu[t]
        p00 = plane[np.ix_(u0, v0)]
        p01 = plane[np.ix_(u0, v0 + 1)] if nv > 1 else p00
        p10 = plane[np.ix_(u0 + 1, v0)] if nu > 1 else p00
        p11 = plane[np.ix_(u0 + 1, v0 + 1)] if nu > 1 and nv > 1 else p00
        depth += (wu0 * wv0) * p00 + (wu0 * wv1) * p01 + (wu1 * wv0) * p10 + (wu1 * wv1) * p11
    depth *= step_mm
    img = 1.0 - np.exp(-depth)
    if supersample > 1:
        img = img.reshape(out_n, supersample, out_n, supersample).mean(axis=(1, 3))
    return img
