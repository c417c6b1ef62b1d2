"""Command-line pipeline: synth, train, eval, reconstruct, export-mesh, serve.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Every flag can also
be set through an environment variable with the T3D_ prefix (for example
``T3D_SERVE_WORKERS=4 t3d serve ...``).
"""

import json
import sys
from pathlib import Path

import click

from . import formats
from .grids import binarize, project_orthographic, voxel_volume
from .meshes import marching_cubes
from .metrics import MetricsReport
from .model import checkpoint as ckpt
from .phantom import synthesize_dataset
from .training import (
    ExampleSource,
    TrainingConfig,
    TrainingDivergedError,
    VariantMismatchError,
    evaluate_checkpoint,
    predict,
    train as run_training,
)

CONTEXT_SETTINGS = dict(auto_envvar_prefix="T3D", help_option_names=["-h", "--help"])


def _fail(message: str):
    raise click.ClickException(message)  # exit code 1


def _manifest_path(data_dir) -> Path:
    p = Path(data_dir)
    if p.is_file():
        return p
    manifest = p / "manifest.json"
    if not manifest.exists():
        _fail(f"no manifest.json under {p}")
    return manifest


@click.group(context_settings=CONTEXT_SETTINGS)
@click.version_option(package_name="topo3d")
def main():
    """3D organ-shape reconstruction pipeline."""


@main.command()
@click.option("--count", type=int, required=True, help="Number of phantom cases.")
@click.option("--seed", type=int, default=0, show_default=True, help="Dataset seed.")
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Output directory.")
@click.option("--grid-dim", type=int, default=64, show_default=True, help="Voxel grid dimension.")
@click.option("--topo-dim", type=int, default=256, show_default=True, help="Topogram resolution.")
@click.option("--spacing", type=float, default=4.0, show_default=True, help="Voxel spacing, mm.")
def synth(count, seed, out_dir, grid_dim, topo_dim, spacing):
    """Synthesize a phantom dataset with manifest."""
    if count <= 0:
        raise click.BadParameter("--count must be positive")
    try:
        manifest = synthesize_dataset(
            count, seed, out_dir, grid_dim=grid_dim, topo_dim=topo_dim, spacing_mm=(spacing,) * 3
        )
    except (OSError, ValueError, RuntimeError) as exc:
        _fail(str(exc))
    click.echo(str(manifest))


@main.command(name="train")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), required=True, help="JSON training config.")
@click.option("--data", "data_dir", type=click.Path(exists=True, path_type=Path), required=True, help="Dataset directory or manifest.")
@click.option("--out", "out_ckpt", type=click.Path(path_type=Path), required=True, help="Checkpoint output path.")
@click.option("--log", "log_path", type=click.Path(path_type=Path), default=None, help="JSON-lines training log path [default: <out>.log.jsonl].")
@click.option("--resume", "resume_from", type=click.Path(exists=True, path_type=Path), default=None, help="Resume from a checkpoint.")
@click.option("--quiet/--verbose", default=False, show_default=True, help="Suppress per-epoch progress lines.")
def train_cmd(config_path, data_dir, out_ckpt, log_path, resume_from, quiet):
    """Train a model variant on a synthesized dataset."""
    try:
        config = TrainingConfig.from_file(config_path)
    except (ValueError, OSError) as exc:
        raise click.UsageError(f"bad config: {exc}")
    log_path = log_path or Path(str(out_ckpt) + ".log.jsonl")
    try:
        source = ExampleSource(_manifest_path(data_dir))
        model, log, path = run_training(config, source, out_ckpt, log_path=log_path, resume_from=resume_from, quiet=quiet)
    except TrainingDivergedError as exc:
        _fail(f"training diverged: {exc}")
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        _fail(str(exc))
    last = [r for r in log.records if r["type"] == "epoch"][-1]
    click.echo(
        "final losses: "
        + " ".join(f"{k}={last[f'mean_{k}']:.6f}" for k in ("rec", "kl", "obs_rec", "mask", "total"))
    )
    click.echo(str(path))


@main.command(name="eval")
@click.option("--ckpt", "ckpts", required=True, help="Checkpoint path(s), comma-separated.")
@click.option("--data", "data_dir", type=click.Path(exists=True, path_type=Path), required=True, help="Dataset directory or manifest.")
@click.option("--split", type=click.Choice(["train", "test"]), default="test", show_default=True)
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True, help="Report directory.")
@click.option("--threshold", type=float, default=0.5, show_default=True, help="Binarization threshold.")
def eval_cmd(ckpts, data_dir, split, out_dir, threshold):
    """Evaluate checkpoints: per-case CSV plus aggregate JSON per checkpoint."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [Path(p.strip()) for p in ckpts.split(",") if p.strip()]
    if not paths:
        raise click.BadParameter("--ckpt needs at least one path")
    try:
        source = ExampleSource(_manifest_path(data_dir))
        merged = {}
        for path in paths:
            model, header, _ = ckpt.load_model(path)
            report = evaluate_checkpoint(model, source, split=split, threshold=threshold)
            report.write_csv(out_dir / f"{path.stem}.cases.csv")
            report.write_json(out_dir / f"{path.stem}.aggregate.json")
            merged[path.stem] = report.to_table_dict()
            agg = report.aggregate
            click.echo(
                f"{path.stem}: iou={agg['iou']:.4f} dice={agg['dice']:.4f} "
                f"hausdorff={agg['hausdorff_vox']:.4f} volume_error={agg['volume_error']:.4f}"
            )
        with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
            json.dump({"checkpoints": merged}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except (OSError, ValueError, KeyError) as exc:
        _fail(str(exc))


@main.command()
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True, path_type=Path), required=True, help="Checkpoint.")
@click.option("--topogram", "topo_path", type=click.Path(exists=True, path_type=Path), required=True, help="Topogram PGM.")
@click.option("--mask", "mask_path", type=click.Path(exists=True, path_type=Path), default=None, help="Binary mask PGM (mask-variant checkpoints).")
@click.option("--out", "prefix", type=click.Path(path_type=Path), required=True, help="Output path prefix.")
@click.option("--threshold", type=float, default=0.5, show_default=True, help="Binarization threshold.")
def reconstruct(ckpt_path, topo_path, mask_path, prefix, threshold):
    """Reconstruct one case: writes <out>.vgrid, <out>.obj, <out>_proj.pgm."""
    if not 0.0 < threshold < 1.0:
        raise click.BadParameter("--threshold must lie in (0, 1)")
    try:
        model, header, _ = ckpt.load_model(ckpt_path)
        topo = formats.read_topogram(topo_path)
        mask = formats.read_mask(mask_path) if mask_path else None
    except (formats.FormatError, ValueError, OSError) as exc:
        _fail(str(exc))
    spacing = tuple(header.get("config", {}).get("spacing_mm", (1.0, 1.0, 1.0)))
    axis = header.get("config", {}).get("axis", "y")
    try:
        pred = predict(model, topo, mask, spacing_mm=spacing)
    except VariantMismatchError as exc:
        raise click.UsageError(str(exc))
    except (TrainingDivergedError, ValueError) as exc:
        _fail(str(exc))
    hard = binarize(pred, threshold)
    _, ml = voxel_volume(hard)
    formats.write_grid(Path(f"{prefix}.vgrid"), pred)
    formats.write_mesh(Path(f"{prefix}.obj"), marching_cubes(pred, threshold))
    formats.write_mask(Path(f"{prefix}_proj.pgm"), project_orthographic(hard, axis))
    click.echo(f"volume_ml {ml:.6f}")


@main.command(name="export-mesh")
@click.option("--grid", "grid_path", type=click.Path(exists=True, path_type=Path), required=True, help="Input .vgrid.")
@click.option("--iso", type=float, default=0.5, show_default=True, help="Iso value in (0, 1).")
@click.option("--out", "out_path", type=click.Path(path_type=Path), required=True, help="Output OBJ path.")
def export_mesh(grid_path, iso, out_path):
    """Extract a marching-cubes mesh from a voxel grid file."""
    if not 0.0 < iso < 1.0:
        raise click.BadParameter("--iso must lie in (0, 1)")
    try:
        grid = formats.read_grid(grid_path)
        mesh = marching_cubes(grid, iso)
        formats.write_mesh(out_path, mesh)
    except (formats.FormatError, ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"{out_path} vertices {len(mesh.vertices)} triangles {len(mesh.triangles)}")


@main.command()
@click.option("--models", "model_dir", type=click.Path(exists=True, path_type=Path), required=True, help="Checkpoint directory.")
@click.option("--listen", default="127.0.0.1:8404", show_default=True, help="host:port to bind.")
@click.option("--workers", type=int, default=2, show_default=True, help="Max concurrent forward passes.")
@click.option("--queue-timeout", type=float, default=5.0, show_default=True, help="Seconds to wait for a worker before 503.")
@click.option("--ui-dir", type=click.Path(exists=True, path_type=Path), default=None, help="Static annotation-UI directory to serve at /.")
@click.option("--cors-origin", default="*", show_default=True, help="Allowed CORS origin.")
def serve(model_dir, listen, workers, queue_timeout, ui_dir, cors_origin):
    """Run the HTTP inference service."""
    import uvicorn

    from .service import create_app

    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise click.BadParameter("--listen must look like host:port")
    app = create_app(model_dir, workers=workers, queue_timeout_s=queue_timeout, ui_dir=ui_dir, cors_origin=cors_origin)
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    except (OSError, SystemExit) as exc:
        _fail(f"server failed to start: {exc}")


if __name__ == "__main__":
    main()
