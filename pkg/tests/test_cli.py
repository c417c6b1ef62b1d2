import json
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import numpy as np
import pytest
from click.testing import CliRunner

from topo3d import formats
from topo3d.cli import main
from topo3d.grids import binarize, project_orthographic


@pytest.fixture()
def runner():
    return CliRunner()


def run_cli(runner, args, **kw):
    return runner.invoke(main, args, catch_exceptions=False, **kw)


class TestSynth:
    def test_creates_triples_and_manifest(self, runner, tmp_path):
        r = run_cli(runner, ["synth", "--count", "3", "--seed", "4", "--out", str(tmp_path / "d"), "--grid-dim", "32", "--topo-dim", "128"])
        assert r.exit_code == 0
        manifest = Path(r.output.strip().splitlines()[-1])
        man = json.loads(manifest.read_text())
        assert len(man["cases"]) == 3
        for case in man["cases"]:
            for key in case["paths"].values():
                assert (tmp_path / "d" / key).exists()

    def test_rerun_byte_identical(self, runner, tmp_path):
        a1 = ["synth", "--count", "2", "--seed", "9", "--out", str(tmp_path / "a"), "--grid-dim", "32", "--topo-dim", "128"]
        a2 = ["synth", "--count", "2", "--seed", "9", "--out", str(tmp_path / "b"), "--grid-dim", "32", "--topo-dim", "128"]
        assert run_cli(runner, a1).exit_code == 0
        assert run_cli(runner, a2).exit_code == 0
        for f in sorted((tmp_path / "a").iterdir()):
            assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    def test_zero_count_is_usage_error(self, runner, tmp_path):
        r = runner.invoke(main, ["synth", "--count", "0", "--out", str(tmp_path)])
        assert r.exit_code == 2

    def test_unknown_flag_rejected(self, runner, tmp_path):
        r = runner.invoke(main, ["synth", "--count", "1", "--out", str(tmp_path), "--bogus", "1"])
        assert r.exit_code == 2


class TestTrainEval:
    def test_train_writes_checkpoint_log_and_prints_losses(self, runner, dataset32, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "variant": "topogram-only",
                    "epochs": 2,
                    "batch_size": 4,
                    "seed": 3,
                    "grid_dim": 32,
                    "topo_dim": 128,
                    "mask_dim": 32,
                    "latent_dim": 8,
                    "base_channels": 4,
                    "checkpoint_every": 0,
                }
            )
        )
        out = tmp_path / "m.ckpt"
        r = run_cli(runner, ["train", "--config", str(cfg), "--data", str(dataset32.parent), "--out", str(out), "--quiet"])
        assert r.exit_code == 0, r.output
        assert "final losses:" in r.output
        assert out.exists() and Path(str(out) + ".log.jsonl").exists()

    def test_missing_data_dir_fails_runtime(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"variant": "topogram-only", "epochs": 1}))
        r = runner.invoke(main, ["train", "--config", str(cfg), "--data", str(tmp_path), "--out", str(tmp_path / "x.ckpt")])
        assert r.exit_code == 1

    def test_eval_ground_truth_against_itself(self, runner, source32, topo_ckpt, tmp_path):
        r = run_cli(
            runner,
            ["eval", "--ckpt", str(topo_ckpt), "--data", str(source32.manifest_path), "--split", "test", "--out", str(tmp_path / "rep")],
        )
        assert r.exit_code == 0, r.output
        stem = Path(topo_ckpt).stem
        report = json.loads((tmp_path / "rep" / f"{stem}.aggregate.json").read_text())
        assert "shape_reconstruction" in report
        rows = (tmp_path / "rep" / f"{stem}.cases.csv").read_text().strip().splitlines()
        assert len(rows) == 1 + 2  # header + 2 test cases
        # hand-average the per-case ious and compare with the aggregate
        ious = [float(line.split(",")[1]) for line in rows[1:]]
        assert report["shape_reconstruction"]["iou"] == pytest.approx(sum(ious) / len(ious), abs=1e-6)


class TestReconstruct:
    def test_outputs_and_projection_consistency(self, runner, topo_ckpt, source32, tmp_path):
        case = source32.manifest["cases"][0]["paths"]
        prefix = tmp_path / "out"
        r = run_cli(
            runner,
            ["reconstruct", "--ckpt", str(topo_ckpt), "--topogram", str(source32.root / case["topogram"]), "--out", str(prefix)],
        )
        assert r.exit_code == 0, r.output
        assert r.output.startswith("volume_ml ")
        grid = formats.read_grid(f"{prefix}.vgrid")
        proj = formats.read_mask(f"{prefix}_proj.pgm")
        assert np.array_equal(proj.values, project_orthographic(binarize(grid, 0.5), "y").values)
        mesh = formats.read_mesh(f"{prefix}.obj")
        assert len(mesh.vertices) > 0

    def test_rerun_deterministic(self, runner, topo_ckpt, source32, tmp_path):
        case = source32.manifest["cases"][0]["paths"]
        args = ["reconstruct", "--ckpt", str(topo_ckpt), "--topogram", str(source32.root / case["topogram"])]
        assert run_cli(runner, args + ["--out", str(tmp_path / "a")]).exit_code == 0
        assert run_cli(runner, args + ["--out", str(tmp_path / "b")]).exit_code == 0
        for suffix in (".vgrid", ".obj", "_proj.pgm"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()

    def test_mask_with_topogram_only_checkpoint_usage_error(self, runner, topo_ckpt, source32, tmp_path):
        case = source32.manifest["cases"][0]["paths"]
        r = runner.invoke(
            main,
            [
                "reconstruct",
                "--ckpt",
                str(topo_ckpt),
                "--topogram",
                str(source32.root / case["topogram"]),
                "--mask",
                str(source32.root / case["mask"]),
                "--out",
                str(tmp_path / "x"),
            ],
        )
        assert r.exit_code == 2


class TestExportMesh:
    def test_empty_grid_valid_empty_obj(self, runner, tmp_path):
        from topo3d.grids import VoxelGrid

        g = tmp_path / "empty.vgrid"
        formats.write_grid(g, VoxelGrid(np.zeros((16, 16, 16), np.float32)))
        r = run_cli(runner, ["export-mesh", "--grid", str(g), "--iso", "0.5", "--out", str(tmp_path / "e.obj")])
        assert r.exit_code == 0
        mesh = formats.read_mesh(tmp_path / "e.obj")
        assert len(mesh.triangles) == 0

    def test_ball_grid_closed_mesh(self, runner, tmp_path):
        from topo3d.grids import VoxelGrid

        idx = np.arange(32)
        x, y, z = np.meshgrid(idx, idx, idx, indexing="ij")
        ball = (((x - 16.0) ** 2 + (y - 16.0) ** 2 + (z - 16.0) ** 2) <= 100.0).astype(np.float32)
        g = tmp_path / "ball.vgrid"
        formats.write_grid(g, VoxelGrid(ball))
        r = run_cli(runner, ["export-mesh", "--grid", str(g), "--out", str(tmp_path / "b.obj")])
        assert r.exit_code == 0
        mesh = formats.read_mesh(tmp_path / "b.obj")
        counts = mesh.edge_counts()
        assert np.all(counts == 2)

    def test_bad_iso_usage_error(self, runner, tmp_path):
        g = tmp_path / "g.vgrid"
        from topo3d.grids import VoxelGrid

        formats.write_grid(g, VoxelGrid(np.zeros((8, 8, 8), np.float32)))
        r = runner.invoke(main, ["export-mesh", "--grid", str(g), "--iso", "1.5", "--out", str(tmp_path / "x.obj")])
        assert r.exit_code == 2


class TestServe:
    def test_serve_subprocess_health(self, topo_ckpt, tmp_path):
        import shutil

        model_dir = tmp_path / "models"
        model_dir.mkdir()
        shutil.copy(topo_ckpt, model_dir / "m.ckpt")
        with socket.socket() as s:
            s.bind(("127.0.0.1", 0))
            port = s.getsockname()[1]
        proc = subprocess.Popen(
            [sys.executable, "-m", "topo3d.cli", "serve", "--models", str(model_dir), "--listen", f"127.0.0.1:{port}"],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
        )
        try:
            body = None
            for _ in range(300):
                try:
                    body = httpx.get(f"http://127.0.0.1:{port}/v1/health", timeout=1.0).json()
                    break
                except httpx.TransportError:
                    if proc.poll() is not None:
                        pytest.fail(f"serve exited early: {proc.stdout.read().decode()}")
                    time.sleep(0.1)
            assert body and body["status"] == "ok"
        finally:
            proc.send_signal(signal.SIGINT)
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                proc.kill()

    def test_help_documents_all_subcommands(self):
        runner = CliRunner()
        top = runner.invoke(main, ["--help"])
        for sub in ("synth", "train", "eval", "reconstruct", "export-mesh", "serve"):
            assert sub in top.output
            child = runner.invoke(main, [sub, "--help"])
            assert child.exit_code == 0
            assert "--help" in child.output or "Usage" in child.output
