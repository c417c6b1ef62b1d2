import json
import math
from collections import deque
from dataclasses import replace

import numpy as np
import pytest

from topo3d.formats import read_grid, read_mask, read_topogram
from topo3d.grids import VoxelGrid, project_orthographic
from topo3d.phantom import (
    PhantomParams,
    SceneParams,
    build_scene,
    generate_phantom,
    simulate_topogram,
    split_counts,
    superellipsoid_inside,
    synthesize_dataset,
)


def flood_fill_components(values):
    """BFS 6-connected component count (independent of scipy.ndimage)."""
    d = values.shape[0]
    seen = np.zeros_like(values, dtype=bool)
    comps = 0
    for i in range(d):
        for j in range(d):
            for k in range(d):
                if values[i, j, k] == 0 or seen[i, j, k]:
                    continue
                comps += 1
                q = deque([(i, j, k)])
                seen[i, j, k] = True
                while q:
                    x, y, z = q.popleft()
                    for dx, dy, dz in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                        nx, ny, nz = x + dx, y + dy, z + dz
                        if 0 <= nx < d and 0 <= ny < d and 0 <= nz < d:
                            if values[nx, ny, nz] != 0 and not seen[nx, ny, nz]:
                                seen[nx, ny, nz] = True
                                q.append((nx, ny, nz))
    return comps


def raycast_oracle(mu, step_mm, out_n, supersample):
    """Scalar per-ray Beer-Lambert integration with bilinear lateral sampling."""
    nray, nu, nv = mu.shape
    s = out_n * supersample
    img = np.zeros((out_n, out_n))
    for i in range(s):
        u = (i + 0.5) * (nu / s) - 0.5
        u0 = min(max(int(math.floor(u)), 0), nu - 2)
        fu = min(max(u - u0, 0.0), 1.0)
        for j in range(s):
            v = (j + 0.5) * (nv / s) - 0.5
            v0 = min(max(int(math.floor(v)), 0), nv - 2)
            fv = min(max(v - v0, 0.0), 1.0)
            depth = 0.0
            for t in range(nray):
                interp = (
                    (1 - fu) * (1 - fv) * mu[t, u0, v0]
                    + (1 - fu) * fv * mu[t, u0, v0 + 1]
                    + fu * (1 - fv) * mu[t, u0 + 1, v0]
                    + fu * fv * mu[t, u0 + 1, v0 + 1]
                )
                depth += interp * step_mm
            img[i // supersample, j // supersample] += (1.0 - math.exp(-depth)) / supersample**2
    return img


class TestGeneratePhantom:
    def test_pure_superellipsoid_matches_analytic_membership(self):
        params = PhantomParams(
            seed=5,
            grid_dim=32,
            lobe_count_range=(0, 0),
            deformation_amplitude=0.0,
        )
        grid = generate_phantom(params)
        # recover the sampled geometry exactly as the generator drew it
        rng = np.random.default_rng([5, 0, 0x5EED])
        semi = rng.uniform(*params.semiaxis_range, size=3) * 32
        center = 32 / 2.0 + rng.uniform(-params.center_jitter, params.center_jitter, size=3) * 32
        exponent = rng.uniform(*params.exponent_range)
        for i in range(32):
            for j in range(32):
                for k in range(32):
                    expect = superellipsoid_inside((i, j, k), center, semi, exponent)
                    assert bool(grid.values[i, j, k]) == expect, (i, j, k)

    def test_same_seed_same_grid(self):
        a = generate_phantom(PhantomParams(seed=3, grid_dim=32))
        b = generate_phantom(PhantomParams(seed=3, grid_dim=32))
        assert np.array_equal(a.values, b.values)

    def test_connectivity_margin_volume_over_seeds(self):
        params = PhantomParams(grid_dim=32)
        for seed in range(25):
            g = generate_phantom(replace(params, seed=seed))
            vals = g.values
            assert flood_fill_components(vals) == 1
            assert not vals[0].any() and not vals[-1].any()
            assert not vals[:, 0].any() and not vals[:, -1].any()
            assert not vals[:, :, 0].any() and not vals[:, :, -1].any()
            frac = vals.sum() / vals.size
            assert 0.02 <= frac <= 0.40

    def test_successive_seeds_are_diverse(self):
        grids = [generate_phantom(PhantomParams(seed=s, grid_dim=32)).values != 0 for s in range(8)]
        for i in range(len(grids)):
            for j in range(i + 1, len(grids)):
                inter = (grids[i] & grids[j]).sum()
                union = (grids[i] | grids[j]).sum()
                assert inter / union < 0.9

    def test_impossible_constraints_raise(self):
        params = PhantomParams(seed=0, grid_dim=32, volume_fraction=(0.39, 0.40), max_retries=4)
        with pytest.raises(Exception, match="constraints"):
            generate_phantom(params)


class TestSimulateTopogram:
    def test_empty_scene_gives_zero_image(self):
        img = simulate_topogram(np.zeros((16, 16, 16)), (1, 1, 1), out_dim=16, supersample=1)
        assert not img.values.any()

    def test_single_voxel_analytic_attenuation(self):
        mu = np.zeros((16, 16, 16))
        mu[5, 8, 9] = 0.693147180559945  # ln 2 per mm, 1 mm path -> 0.5
        topo = simulate_topogram(mu, (1.0, 1.0, 1.0), axis="y", out_dim=16, supersample=1)
        assert topo.values[5, 9] == pytest.approx(0.5, abs=1e-6)
        assert topo.values.sum() == pytest.approx(0.5, abs=1e-5)

    def test_matches_scalar_oracle(self):
        rng = np.random.default_rng(0)
        mu = rng.random((8, 8, 8)) * 0.05
        for axis, perm in (("x", (0, 1, 2)), ("y", (1, 0, 2)), ("z", (2, 0, 1))):
            topo = simulate_topogram(mu, (2.0, 2.0, 2.0), axis=axis, out_dim=16, supersample=2)
            expect = raycast_oracle(np.transpose(mu, perm), 2.0, 16, 2)
            assert np.abs(topo.values - expect).max() < 1e-6

    def test_values_strictly_below_one(self):
        mu = np.full((16, 16, 16), 10.0)  # absurdly dense
        topo = simulate_topogram(mu, (4, 4, 4), out_dim=16, supersample=1)
        assert topo.values.max() < 1.0

    def test_rejects_negative_attenuation(self):
        mu = np.zeros((8, 8, 8))
        mu[0, 0, 0] = -0.1
        with pytest.raises(ValueError, match="nonnegative"):
            simulate_topogram(mu, (1, 1, 1))

    def test_monotone_in_organ_dilation(self):
        g = generate_phantom(PhantomParams(seed=1, grid_dim=32))
        scene = SceneParams()
        base = simulate_topogram(build_scene(g, scene), g.spacing_mm, out_dim=64, supersample=1)
        grown = np.asarray(g.values).copy()
        # 6-neighbor dilation by one voxel
        for axis in range(3):
            for shift in (1, -1):
                grown = np.maximum(grown, np.roll(g.values, shift, axis))
        grown[0] = grown[-1] = 0
        grown[:, 0] = grown[:, -1] = 0
        grown[:, :, 0] = grown[:, :, -1] = 0
        dil = simulate_topogram(build_scene(VoxelGrid(grown, g.spacing_mm), scene), g.spacing_mm, out_dim=64, supersample=1)
        assert (dil.values - base.values).min() >= -1e-6


class TestSynthesizeDataset:
    def test_masks_equal_projections_and_rerun_byte_identical(self, tmp_path):
        out1 = tmp_path / "d1"
        out2 = tmp_path / "d2"
        m1 = synthesize_dataset(4, seed=9, out_dir=out1, grid_dim=32, topo_dim=128)
        m2 = synthesize_dataset(4, seed=9, out_dir=out2, grid_dim=32, topo_dim=128)
        man = json.loads(m1.read_text())
        assert len(man["cases"]) == 4
        for case in man["cases"]:
            shape = read_grid(out1 / case["paths"]["shape"])
            mask = read_mask(out1 / case["paths"]["mask"])
            topo = read_topogram(out1 / case["paths"]["topogram"])
            assert np.array_equal(mask.values, project_orthographic(shape, man["axis"]).values)
            assert topo.values.shape == (128, 128)
        for case in man["cases"]:
            for key in ("shape", "topogram", "mask"):
                assert (out1 / case["paths"][key]).read_bytes() == (out2 / case["paths"][key]).read_bytes()
        assert m1.read_text() == m2.read_text()

    def test_split_ratio_mirrors_protocol(self):
        assert split_counts(2129) == (1554, 575)
        assert split_counts(200) == (146, 54)

    def test_manifest_schema(self, tmp_path):
        mp = synthesize_dataset(3, seed=1, out_dir=tmp_path, grid_dim=32, topo_dim=128)
        man = json.loads(mp.read_text())
        assert set(man) >= {"version", "seed", "spacing_mm", "cases"}
        for case in man["cases"]:
            assert set(case) == {"id", "seed", "split", "paths"}
            assert case["split"] in ("train", "test")
            assert set(case["paths"]) == {"shape", "topogram", "mask"}
        ids = [c["id"] for c in man["cases"]]
        assert len(set(ids)) == len(ids)

    def test_rejects_nonpositive_count(self, tmp_path):
        with pytest.raises(ValueError, match="positive"):
            synthesize_dataset(0, seed=0, out_dir=tmp_path)
