"""HTTP inference service.

JSON envelopes with base64 binary payloads; endpoints:

  POST /v1/reconstruct   topogram (+ optional mask) -> voxels/mesh/projection/volume
  GET  /v1/models        checkpoints found in the model directory
  GET  /v1/health        liveness and model count

Requests never mutate server state; each forward pass runs on an immutable
model snapshot inside a bounded worker pool, and requests that cannot get a
worker within the queue timeout are answered 503.
"""

import base64
import sys
import threading
import time
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from . import formats
from .grids import BINARY, binarize, project_orthographic, voxel_volume
from .meshes import marching_cubes
from .model import checkpoint as ckpt
from .training.loop import TrainingDivergedError, VariantMismatchError, predict

ALLOWED_OUTPUTS = ("voxels", "mesh", "projection", "volume")


class ReconstructRequest(BaseModel):
    topogram: str = Field(description="base64 P5 PGM, model input size")
    mask: str | None = Field(default=None, description="base64 P5 PGM binary mask")
    model_id: str
    outputs: list[str] = Field(default=["voxels", "volume"])
    threshold: float = 0.5
    request_id: str | None = None


class ReconstructResponse(BaseModel):
    voxels: str | None = None
    mesh: str | None = None
    projection: str | None = None
    volume_ml: float
    latency_ms: float
    model_id: str
    request_id: str


class ModelRegistry:
    """Immutable view of a checkpoint directory; loads models on first use."""

    def __init__(self, model_dir):
        self.model_dir = Path(model_dir)
        self._loaded = {}
        self._lock = threading.Lock()

    def scan(self):
        entries = []
        for path in sorted(self.model_dir.glob("*.ckpt")):
            try:
                header = ckpt.read_header(path)
            except (ValueError, OSError):
                continue
            entries.append(
                {
                    "id": path.stem,
                    "variant": header["variant"],
                    "dims": header["dims"],
                    "epoch": header["epoch"],
                    "seed": header["seed"],
                    "training_summary": header.get("summary", {}),
                }
            )
        return entries

    def load_all(self):
        for entry in self.scan():
            self.get(entry["id"])

    def get(self, model_id):
        with self._lock:
            if model_id in self._loaded:
                return self._loaded[model_id]
        path = self.model_dir / f"{model_id}.ckpt"
        if not path.exists():
            return None
        model, header, _ = ckpt.load_model(path)
        spacing = tuple(header.get("config", {}).get("spacing_mm", (1.0, 1.0, 1.0)))
        axis = header.get("config", {}).get("axis", "y")
        with self._lock:
            self._loaded.setdefault(model_id, (model, spacing, axis))
            return self._loaded[model_id]

    @property
    def loaded_count(self):
        with self._lock:
            return len(self._loaded)


def _decode_b64(field_name, payload):
    try:
        return base64.b64decode(payload, validate=True)
    except Exception as exc:
        raise HTTPException(400, f"{field_name}: invalid base64 payload") from exc


def create_app(model_dir, workers: int = 2, queue_timeout_s: float = 5.0, ui_dir=None, cors_origin="*") -> FastAPI:
    # worker threads run long numpy sections; a short GIL switch interval
    # keeps the event loop (health checks, small GETs) responsive under load
    sys.setswitchinterval(0.001)
    app = FastAPI(title="topo3d inference service", version="1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    registry = ModelRegistry(model_dir)
    registry.load_all()
    slots = threading.BoundedSemaphore(workers)
    started = time.monotonic()

    @app.get("/v1/health")
    async def health():
        return {
            "status": "ok",
            "uptime_s": time.monotonic() - started,
            "models_loaded": registry.loaded_count,
        }

    @app.get("/v1/models")
    def models():
        return registry.scan()

    @app.post("/v1/reconstruct", response_model=ReconstructResponse, response_model_exclude_none=True)
    def reconstruct(req: ReconstructRequest):
        t0 = time.perf_counter()
        request_id = req.request_id or str(uuid.uuid4())
        bad = [o for o in req.outputs if o not in ALLOWED_OUTPUTS]
        if bad:
            raise HTTPException(400, f"unknown outputs {bad}; allowed: {list(ALLOWED_OUTPUTS)}")
        if not 0.0 < req.threshold < 1.0:
            raise HTTPException(400, f"threshold must lie in (0, 1), got {req.threshold}")
        entry = registry.get(req.model_id)
        if entry is None:
            raise HTTPException(404, f"unknown model {req.model_id!r}")
        model, spacing, axis = entry
        try:
            topo = formats.topogram_from_bytes(_decode_b64("topogram", req.topogram), "topogram")
        except formats.FormatError as exc:
            raise HTTPException(400, f"topogram: {exc}") from exc
        mask = None
        if req.mask is not None:
            try:
                mask = formats.mask_from_bytes(_decode_b64("mask", req.mask), "mask")
            except formats.FormatError as exc:
                raise HTTPException(400, f"mask: {exc}") from exc
            if mask.kind != BINARY:
                raise HTTPException(400, "mask must be binary (values 0 or 1)")

        if not slots.acquire(timeout=queue_timeout_s):
            raise HTTPException(503, "all inference workers busy; retry later")
        try:
            try:
                pred = predict(model, topo, mask, spacing_mm=spacing)
            except VariantMismatchError as exc:
                raise HTTPException(409, str(exc)) from exc
            except TrainingDivergedError as exc:
                raise HTTPException(500, str(exc)) from exc
            except ValueError as exc:
                raise HTTPException(400, str(exc)) from exc
            hard = binarize(pred, req.threshold)
            _, volume_ml = voxel_volume(hard)
            response = ReconstructResponse(
                volume_ml=volume_ml,
                latency_ms=(time.perf_counter() - t0) * 1e3,
                model_id=req.model_id,
                request_id=request_id,
            )
            if "voxels" in req.outputs:
                response.voxels = base64.b64encode(formats.grid_to_bytes(pred)).decode("ascii")
            if "mesh" in req.outputs:
                response.mesh = formats.mesh_to_text(marching_cubes(pred, req.threshold))
            if "projection" in req.outputs:
                proj = project_orthographic(hard, axis)
                response.projection = base64.b64encode(formats.mask_to_bytes(proj)).decode("ascii")
            return response
        finally:
            slots.release()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
