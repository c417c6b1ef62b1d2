#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallbacks.

Run:  python3 benchmarks/bench_backends.py [--quick]

Conv cases cover the production and reduced network layers that dominate
training and inference time; the geometry cases cover metric evaluation,
topogram simulation and meshing. Times are best-of-3 after a warmup call.
"""

import argparse
import time

import numpy as np

from topo3d.kernels import conv_numba, conv_numpy, geom_numba, geom_numpy


def best_of(fn, repeats=3):
    fn()  # warmup (and JIT compile)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_conv(name, maker, quick):
    rng = np.random.default_rng(0)
    rows = []
    for case, (xshape, wshape, stride, pad, transposed) in maker.items():
        if quick and "prod" in case:
            continue
        x = rng.normal(size=xshape).astype(np.float32)
        w = rng.normal(size=wshape).astype(np.float32)
        dims = len(xshape) - 2
        for mod, label in ((conv_numpy, "numpy"), (conv_numba, "numba")):
            fwd = getattr(mod, f"conv{dims}d_forward")
            bwd_x = getattr(mod, f"conv{dims}d_backward_input")
            bwd_w = getattr(mod, f"conv{dims}d_backward_weight")
            if transposed:
                t_f = best_of(lambda: bwd_x(w, x, tuple((n - 1) * stride + w.shape[2] - 2 * pad for n in xshape[2:]), stride, pad))
                rows.append((f"{name} {case} fwd", label, t_f))
            else:
                y = fwd(x, w, stride, pad)
                dy = rng.normal(size=y.shape).astype(np.float32)
                rows.append((f"{name} {case} fwd", label, best_of(lambda: fwd(x, w, stride, pad))))
                rows.append((f"{name} {case} bwd_x", label, best_of(lambda: bwd_x(w, dy, xshape[2:], stride, pad))))
                rows.append((f"{name} {case} bwd_w", label, best_of(lambda: bwd_w(x, dy, wshape[2:], stride, pad))))
    return rows


def bench_geometry(quick):
    rng = np.random.default_rng(1)
    rows = []
    a = rng.random((3000 if not quick else 800, 3)) * 60
    b = rng.random((3200 if not quick else 900, 3)) * 60
    for mod, label in ((geom_numpy, "numpy"), (geom_numba, "numba")):
        rows.append(("hausdorff directed", label, best_of(lambda: mod.directed_hausdorff(a, b))))
    mu = rng.random((64, 64, 64)) * 0.03
    for mod, label in ((geom_numpy, "numpy"), (geom_numba, "numba")):
        rows.append(("raycast 256^2 ss2", label, best_of(lambda: mod.raycast_attenuation(mu, 4.0, 256, 2))))
    return rows


CONV_CASES = {
    # (x shape, w shape, stride, pad, transposed)
    "3d reduced L2 (b16)": ((16, 16, 16, 16, 16), (32, 16, 4, 4, 4), 2, 1, False),
    "3d prod L2 (b2)": ((2, 64, 32, 32, 32), (128, 64, 4, 4, 4), 2, 1, False),
    "2d topo reduced L1 (b16)": ((16, 1, 128, 128), (16, 1, 11, 11), 4, 5, False),
    "2d topo prod L1 (b2)": ((2, 1, 256, 256), (64, 1, 11, 11), 4, 5, False),
    "3dT prod decoder L4 (b2)": ((2, 128, 16, 16, 16), (128, 64, 4, 4, 4), 2, 1, True),
}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="skip production-scale cases")
    args = parser.parse_args()
    rows = bench_conv("conv", CONV_CASES, args.quick) + bench_geometry(args.quick)
    by_case = {}
    for case, label, t in rows:
        by_case.setdefault(case, {})[label] = t
    width = max(len(c) for c in by_case)
    print(f"{'case'.ljust(width)}  {'numpy':>10} {'numba':>10}  winner")
    for case, entry in by_case.items():
        tn, tb = entry.get("numpy"), entry.get("numba")
        winner = "numpy" if tn <= tb else "numba"
        print(f"{case.ljust(width)}  {tn * 1e3:>9.1f}ms {tb * 1e3:>9.1f}ms  {winner} x{max(tn, tb) / min(tn, tb):.1f}")


if __name__ == "__main__":
    main()
