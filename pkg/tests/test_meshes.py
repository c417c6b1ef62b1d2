import numpy as np
import pytest

from topo3d import mc_tables
from topo3d.grids import VoxelGrid, voxel_volume
from topo3d.meshes import TriangleMesh, marching_cubes


def ball_grid(dim, radius, spacing=(1.0, 1.0, 1.0)):
    c = dim / 2.0
    idx = np.arange(dim)
    x, y, z = np.meshgrid(idx, idx, idx, indexing="ij")
    vals = (((x - c) ** 2 + (y - c) ** 2 + (z - c) ** 2) <= radius**2).astype(np.float32)
    return VoxelGrid(vals, spacing_mm=spacing)


def directed_edges(mesh):
    t = mesh.triangles
    return np.concatenate([t[:, (0, 1)], t[:, (1, 2)], t[:, (2, 0)]])


class TestCaseTables:
    def test_empty_and_full_cases(self):
        assert mc_tables.TRI_COUNT[0] == 0
        assert mc_tables.TRI_COUNT[255] == 0

    def test_each_case_uses_exactly_its_cut_edges(self):
        for mask in range(256):
            cut = {
                e
                for e, (c0, c1) in enumerate(mc_tables.EDGE_CORNERS)
                if ((mask >> c0) & 1) != ((mask >> c1) & 1)
            }
            used = {int(x) for x in mc_tables.TRI_TABLE[mask] if x >= 0}
            assert used == cut

    def test_table_width_matches_classic_bound(self):
        assert mc_tables.TRI_COUNT.max() == 5


class TestMarchingCubes:
    def test_empty_grid_gives_empty_mesh(self):
        mesh = marching_cubes(VoxelGrid(np.zeros((16, 16, 16), np.float32)), 0.5)
        assert len(mesh.vertices) == 0 and len(mesh.triangles) == 0
        assert mesh.is_closed()
        assert mesh.enclosed_volume_ml == 0.0

    def test_single_voxel_octahedron(self):
        # Eight surrounding cells each see one inside corner -> one triangle
        # each; vertices sit at edge midpoints (iso 0.5 between 0 and 1), so
        # the patch is the octahedron V=6, E=12, F=8 (Euler characteristic 2)
        # with enclosed volume 2 * (1/3) * (1/2 diag^2) * h = 1/6 voxel.
        v = np.zeros((16, 16, 16), np.float32)
        v[7, 8, 9] = 1.0
        mesh = marching_cubes(VoxelGrid(v), 0.5)
        n_v, n_f = len(mesh.vertices), len(mesh.triangles)
        counts = mesh.edge_counts()
        assert (n_v, n_f) == (6, 8)
        assert len(counts) == 12 and np.all(counts == 2)
        assert n_v - len(counts) + n_f == 2
        assert mesh.enclosed_volume_ml * 1000.0 == pytest.approx(1.0 / 6.0, rel=1e-6)
        center = mesh.vertices.mean(axis=0)
        assert center == pytest.approx([7, 8, 9], abs=1e-9)

    def test_ball_volume_within_five_percent(self):
        mesh = marching_cubes(ball_grid(64, 20.0), 0.5)
        analytic_ml = (4.0 / 3.0) * np.pi * 20.0**3 / 1000.0
        assert mesh.is_closed()
        assert mesh.enclosed_volume_ml == pytest.approx(analytic_ml, rel=0.05)

    def test_orientation_consistent_and_outward(self):
        mesh = marching_cubes(ball_grid(32, 10.0), 0.5)
        de = directed_edges(mesh)
        _, counts = np.unique(de, axis=0, return_counts=True)
        assert counts.max() == 1  # each directed edge once => consistent winding
        assert mesh.enclosed_volume_ml > 0  # positive signed volume => outward

    def test_spacing_scales_coordinates_and_volume(self):
        mesh = marching_cubes(ball_grid(32, 10.0, spacing=(2.0, 2.0, 2.0)), 0.5)
        ref = marching_cubes(ball_grid(32, 10.0), 0.5)
        assert mesh.enclosed_volume_ml == pytest.approx(ref.enclosed_volume_ml * 8.0, rel=1e-9)

    def test_random_binary_grids_closed(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            g = VoxelGrid((rng.random((8, 8, 8)) < 0.45).astype(np.float32))
            mesh = marching_cubes(g, 0.5)
            assert mesh.is_closed()
            if len(mesh.triangles):
                de = directed_edges(mesh)
                _, counts = np.unique(de, axis=0, return_counts=True)
                assert counts.max() == 1

    def test_mesh_volume_converges_to_voxel_volume(self):
        gaps = []
        for dim in (16, 32, 64):
            g = ball_grid(dim, 0.3 * dim)
            mesh = marching_cubes(g, 0.5)
            _, vox_ml = voxel_volume(g)
            gaps.append(abs(mesh.enclosed_volume_ml - vox_ml) / vox_ml)
        assert gaps[0] > gaps[1] > gaps[2]

    def test_no_degenerate_triangles_on_smooth_field(self):
        # a scalar field whose iso crossings hit lattice values head-on would
        # collide vertices without the interpolation clamp
        dim = 16
        idx = np.arange(dim, dtype=np.float32)
        x, y, z = np.meshgrid(idx, idx, idx, indexing="ij")
        field = np.clip(1.0 - np.sqrt((x - 8) ** 2 + (y - 8) ** 2 + (z - 8) ** 2) / 8.0, 0.0, 1.0)
        mesh = marching_cubes(VoxelGrid(field, kind="probability"), 0.5)
        a, b, c = (mesh.vertices[mesh.triangles[:, i]] for i in range(3))
        areas = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
        assert areas.min() > 0.0

    @pytest.mark.parametrize("iso", [0.0, 1.0, -1.0, 2.0])
    def test_rejects_bad_iso(self, iso):
        with pytest.raises(ValueError, match="iso"):
            marching_cubes(VoxelGrid(np.zeros((8, 8, 8), np.float32)), iso)


class TestTriangleMesh:
    def test_rejects_invalid_indices(self):
        with pytest.raises(ValueError, match="indices"):
            TriangleMesh(np.zeros((2, 3)), np.array([[0, 1, 2]], np.int32))

    def test_rejects_degenerate_triangle(self):
        verts = np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]])
        with pytest.raises(ValueError, match="degenerate"):
            TriangleMesh(verts, np.array([[0, 1, 2]], np.int32))

    def test_surface_area_of_unit_cube_voxel_block(self):
        # 4^3 block: MC surface is a chamfered cube; area positive and finite
        v = np.zeros((16, 16, 16), np.float32)
        v[6:10, 6:10, 6:10] = 1.0
        mesh = marching_cubes(VoxelGrid(v), 0.5)
        assert mesh.surface_area_mm2 > 0
        assert mesh.is_closed()
