"""End-to-end joint training of the shape VAE and observation encoders.

One optimizer step runs, on a batch of (shape, topogram, mask) triples:

  1. shape encoder -> posterior -> sampled latent -> decoder -> VAE
     reconstruction term, KL term
  2. observation encoder (variant-dependent) -> latent -> decoder ->
     observation reconstruction term, and for mask variants the silhouette
     term on the soft projection of that decoded shape
  3. backprop of the weighted sum through both decoder passes and all
     encoders, then one Adam update

All randomness is drawn from named streams derived from the config seeds:
parameter init and per-epoch sampling noise from the init seed, the shuffle
order from the shuffle seed and epoch index. Training is therefore bitwise
reproducible and resumable from any checkpoint epoch.
"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..grids import PROBABILITY, Mask2D, Topogram, VoxelGrid
from ..metrics import MetricsReport, evaluate_dataset
from ..model import checkpoint as ckpt
from ..model.losses import bce_loss_grad, combined_loss, kl_loss_grad, mask_loss_grad
from ..model.nets import ModelDims, ReconstructionModel, soft_project_batch, soft_project_batch_grad
from .config import TrainingConfig
from .data import ExampleSource
from .optim import Adam

TERM_NAMES = ("rec", "kl", "obs_rec", "mask")


class TrainingDivergedError(RuntimeError):
    pass


class VariantMismatchError(ValueError):
    pass


@dataclass
class TrainingLog:
    records: list = field(default_factory=list)

    def add(self, record):
        self.records.append(record)

    def steps(self):
        return [r for r in self.records if r["type"] == "step"]

    def epoch_mean_total(self, epoch):
        totals = [r["total"] for r in self.records if r["type"] == "step" and r["epoch"] == epoch]
        return float(np.mean(totals))

    def write_jsonl(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for r in self.records:
                fh.write(json.dumps(r, sort_keys=True) + "\n")

    @classmethod
    def read_jsonl(cls, path):
        log = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    log.add(json.loads(line))
        return log


def joint_step(model: ReconstructionModel, batch, alphas, axis, noise, backward=True, training=None):
    """Loss terms of one batch; accumulates parameter gradients when asked."""
    a1, a2, a3, a4 = alphas
    s64 = np.asarray(batch["shape"], dtype=np.float64)
    terms = dict.fromkeys(TERM_NAMES, 0.0)
    training = backward if training is None else training

    vae_active = model.trains_shape_encoder and (a1 > 0.0 or a2 > 0.0)
    if vae_active:
        mu, log_var, enc_cache = model.encode_shape(batch["shape"], training)
        z = model.reparameterize(mu, log_var, noise)
        s_prime, dec_cache_a = model.decode(z, training)
        terms["rec"], d_sprime = bce_loss_grad(s64, s_prime)
        terms["kl"], dmu_kl, dlv_kl = kl_loss_grad(mu, log_var)

    topo = batch.get("topo") if model.uses_topogram else None
    mask = batch.get("mask") if model.uses_mask else None
    z_bar, obs_cache = model.encode_observation(topo, mask, training)
    s_bar, dec_cache_b = model.decode(z_bar, training)
    terms["obs_rec"], d_sbar = bce_loss_grad(s64, s_bar)

    d_kpred = None
    if a4 > 0.0:
        k_pred = soft_project_batch(np.asarray(s_bar, dtype=np.float64), axis)
        terms["mask"], d_kpred = mask_loss_grad(np.asarray(batch["mask"], dtype=np.float64), k_pred)

    total = combined_loss((terms["rec"], terms["kl"], terms["obs_rec"], terms["mask"]), alphas)
    for name in TERM_NAMES:
        if not np.isfinite(terms[name]):
            raise TrainingDivergedError(f"non-finite loss term '{name}' ({terms[name]})")

    if backward:
        d_sbar_total = a3 * d_sbar
        if d_kpred is not None:
            d_sbar_total = d_sbar_total + soft_project_batch_grad(
                np.asarray(s_bar, dtype=np.float64), axis, a4 * d_kpred
            )
        dz_bar = model.decode_backward(dec_cache_b, d_sbar_total)
        model.encode_observation_backward(obs_cache, dz_bar)
        if vae_active:
            dz = model.decode_backward(dec_cache_a, a1 * d_sprime)
            dmu = dz + a2 * dmu_kl
            dlv = dz * noise * 0.5 * np.exp(0.5 * log_var) + a2 * dlv_kl
            model.encode_shape_backward(enc_cache, dmu, dlv)

    terms["total"] = total
    return terms


def _batch_views(data, idx):
    out = {"ids": [data["ids"][i] for i in idx]}
    for key in ("shape", "topo", "mask"):
        if key in data:
            out[key] = data[key][idx]
    return out


def train(
    config: TrainingConfig,
    source: ExampleSource,
    out_ckpt,
    log_path=None,
    resume_from=None,
    quiet=True,
):
    """Run the configured training; returns (model, log, checkpoint_path)."""
    alphas = config.effective_alphas()
    train_ids = source.ids("train")
    if not train_ids:
        raise ValueError(f"{source.manifest_path}: manifest has no training cases")
    data = source.load_batch(
        train_ids,
        need_topo=config.uses_topogram,
        need_mask=config.uses_mask or alphas[3] > 0.0,
    )
    n = len(train_ids)

    dims = ModelDims(**config.dims_dict())
    start_epoch = 0
    adam_t = 0
    model = ReconstructionModel(config.variant, dims, seed=config.effective_init_seed)
    adam = Adam(model.parameters(), config.learning_rate)
    if resume_from is not None:
        model, header, arrays = ckpt.load_model(resume_from)
        if header["variant"] != config.variant:
            raise VariantMismatchError(
                f"checkpoint variant {header['variant']} != config variant {config.variant}"
            )
        start_epoch = header["epoch"]
        adam = Adam(model.parameters(), config.learning_rate)
        adam.load_state(arrays, header["optimizer_step"])
        adam_t = adam.t

    log = TrainingLog()
    global_step = adam_t
    out_ckpt = Path(out_ckpt)

    def save(epoch):
        ckpt.save_checkpoint(
            out_ckpt,
            model,
            epoch=epoch,
            config=config.to_dict(),
            summary={"epochs_run": epoch, "train_cases": n},
            optimizer_arrays=adam.state_arrays(),
            optimizer_step=adam.t,
        )

    for epoch in range(start_epoch, config.epochs):
        t_epoch = time.perf_counter()
        order = np.random.default_rng([config.effective_shuffle_seed, 1, epoch]).permutation(n)
        noise_rng = np.random.default_rng([config.effective_init_seed, 2, epoch])
        epoch_terms = []
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            batch = _batch_views(data, idx)
            noise = noise_rng.standard_normal((len(idx), config.latent_dim)).astype(model.dtype)
            model.zero_grad()
            terms = joint_step(model, batch, alphas, config.axis, noise, backward=True)
            adam.step()
            global_step += 1
            record = {"type": "step", "epoch": epoch, "step": global_step, "batch": len(idx)}
            record.update({k: terms[k] for k in TERM_NAMES})
            record["total"] = terms["total"]
            log.add(record)
            epoch_terms.append(terms)
        mean = {k: float(np.mean([t[k] for t in epoch_terms])) for k in TERM_NAMES + ("total",)}
        log.add(
            {
                "type": "epoch",
                "epoch": epoch,
                "wall_s": time.perf_counter() - t_epoch,
                **{f"mean_{k}": v for k, v in mean.items()},
            }
        )
        if not quiet:
            print(f"epoch {epoch}: total {mean['total']:.4f} " + " ".join(f"{k} {mean[k]:.4f}" for k in TERM_NAMES))
        if config.checkpoint_every and (epoch + 1) % config.checkpoint_every == 0:
            save(epoch + 1)
    save(config.epochs)
    if log_path is not None:
        log.write_jsonl(log_path)
    return model, log, out_ckpt


def predict(model: ReconstructionModel, topogram: Topogram | None, mask: Mask2D | None, spacing_mm=None) -> VoxelGrid:
    """Reconstruct one probability grid from 2D observations."""
    if mask is not None and not model.uses_mask:
        raise VariantMismatchError(f"variant {model.variant} does not accept a mask")
    if model.uses_mask and mask is None:
        raise VariantMismatchError(f"variant {model.variant} requires a mask")
    if model.uses_topogram and topogram is None:
        raise VariantMismatchError(f"variant {model.variant} requires a topogram")
    topo_arr = mask_arr = None
    if model.uses_topogram:
        if topogram.values.shape != (model.dims.topo_dim,) * 2:
            raise ValueError(
                f"topogram is {topogram.values.shape}, model expects {(model.dims.topo_dim,) * 2}"
            )
        topo_arr = topogram.values[None, None]
    if model.uses_mask:
        if mask.values.shape != (model.dims.mask_dim,) * 2:
            raise ValueError(f"mask is {mask.values.shape}, model expects {(model.dims.mask_dim,) * 2}")
        mask_arr = mask.values[None, None]
    probs = model.predict(topo_arr, mask_arr)[0, 0]
    if not np.all(np.isfinite(probs)):
        raise TrainingDivergedError("model produced non-finite voxel probabilities")
    return VoxelGrid(
        np.clip(probs, 0.0, 1.0),
        spacing_mm=spacing_mm or (1.0, 1.0, 1.0),
        kind=PROBABILITY,
    )


def predict_batch(model: ReconstructionModel, batch) -> np.ndarray:
    """(N,1,D,D,D) probability grids for a loaded example batch."""
    topo = batch.get("topo") if model.uses_topogram else None
    mask = batch.get("mask") if model.uses_mask else None
    return model.predict(topo, mask)


def evaluate_checkpoint(model, source: ExampleSource, split="test", threshold=0.5, batch_size=8) -> MetricsReport:
    """Predict every case of a split and score against ground truth."""
    ids = source.ids(split)
    if not ids:
        raise ValueError(f"{source.manifest_path}: no cases in split {split!r}")
    spacing = source.spacing_mm
    predictions = {}
    truths = {}
    for lo in range(0, len(ids), batch_size):
        chunk = ids[lo : lo + batch_size]
        batch = source.load_batch(chunk, need_topo=model.uses_topogram, need_mask=model.uses_mask)
        probs = predict_batch(model, batch)
        for i, case_id in enumerate(chunk):
            predictions[case_id] = VoxelGrid(
                np.clip(probs[i, 0].astype(np.float32), 0.0, 1.0), spacing, kind=PROBABILITY
            )
            truths[case_id] = VoxelGrid(batch["shape"][i, 0], spacing, kind="binary")
    return evaluate_dataset(predictions, truths, threshold=threshold)


def run_ablation(configs, source: ExampleSource, out_dir, quiet=True):
    """Train each variant on the same split and emit a merged comparison."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = {}
    for config in configs:
        tag = config.variant.replace("+", "_")
        model, _, _ = train(
            config,
            source,
            out_dir / f"{tag}.ckpt",
            log_path=out_dir / f"{tag}.log.jsonl",
            quiet=quiet,
        )
        report = evaluate_checkpoint(model, source, split="test")
        report.write_csv(out_dir / f"{tag}.cases.csv")
        report.write_json(out_dir / f"{tag}.aggregate.json")
        reports[config.variant] = report
    merged = {"variants": {v: r.to_table_dict() for v, r in reports.items()}}
    with open(out_dir / "ablation.json", "w", encoding="utf-8") as fh:
        json.dump(merged, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return reports
