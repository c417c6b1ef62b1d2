/** DOM wiring for the annotator. */

import { ApiClient } from "./api";
import { BrushMode, MASK_DIM, StrokePoint } from "./mask_state";
import { drawMask, drawProjection, drawTopogram } from "./overlay";
import { base64ToBytes, parsePgm } from "./pgm";
import { AnnotationSession, TOPO_DIM } from "./session";
import { MeshViewer } from "./viewer";

const SCALE = 2; // canvas pixels per topogram pixel
const CELL = (TOPO_DIM * SCALE) / MASK_DIM; // canvas pixels per mask cell

const el = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

const canvas = el<HTMLCanvasElement>("editor");
const ctx = canvas.getContext("2d")!;
const banner = el<HTMLDivElement>("banner");
const volumeOut = el<HTMLSpanElement>("volume");
const latencyOut = el<HTMLSpanElement>("latency");
const modelOut = el<HTMLSpanElement>("model");
const opacity = el<HTMLInputElement>("opacity");
const brushSize = el<HTMLInputElement>("brush-size");
const fileInput = el<HTMLInputElement>("topogram-file");

const client = new ApiClient("");
let session: AnnotationSession | null = null;
let viewer: MeshViewer | null = null;
let mode: BrushMode = "paint";
let stroke: StrokePoint[] | null = null;

function setBanner(text: string | null, kind: "error" | "info" = "error"): void {
  banner.textContent = text ?? "";
  banner.className = text ? `banner ${kind}` : "banner hidden";
}

function redraw(): void {
  if (!session) return;
  drawTopogram(ctx, session.topogram, SCALE);
  const overlayAlpha = Number(opacity.value) / 100;
  if (session.latest?.projection) {
    drawProjection(ctx, parsePgm(base64ToBytes(session.latest.projection)), CELL, overlayAlpha);
  }
  drawMask(ctx, session.history.current, CELL, 0.45);
  el<HTMLButtonElement>("undo").disabled = !session.history.canUndo();
  el<HTMLButtonElement>("redo").disabled = !session.history.canRedo();
}

function showResult(): void {
  if (!session?.latest) return;
  volumeOut.textContent = `${session.latest.volume_ml.toFixed(1)} mL`;
  latencyOut.textContent = `${session.latest.latency_ms.toFixed(0)} ms`;
  modelOut.textContent = session.latest.model_id;
  if (session.latest.mesh) {
    viewer ??= new MeshViewer(el<HTMLDivElement>("viewport"));
    viewer.showObj(session.latest.mesh);
  }
  redraw();
}

async function loadTopogram(bytes: Uint8Array): Promise<void> {
  try {
    session = await AnnotationSession.load(client, bytes);
    setBanner(null);
    canvas.width = canvas.height = TOPO_DIM * SCALE;
    volumeOut.textContent = latencyOut.textContent = modelOut.textContent = "–";
    redraw();
  } catch (err) {
    session = null;
    setBanner((err as Error).message);
  }
}

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (file) await loadTopogram(new Uint8Array(await file.arrayBuffer()));
});

function toLogical(ev: PointerEvent): StrokePoint {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((ev.clientX - rect.left) / rect.width) * MASK_DIM,
    y: ((ev.clientY - rect.top) / rect.height) * MASK_DIM,
  };
}

canvas.addEventListener("pointerdown", (ev) => {
  if (!session) return;
  canvas.setPointerCapture(ev.pointerId);
  stroke = [toLogical(ev)];
});
canvas.addEventListener("pointermove", (ev) => {
  if (stroke) {
    stroke.push(toLogical(ev));
    if (session) {
      // live preview: apply on a scratch copy for rendering only
      redraw();
      const preview = session.history.current.clone();
      preview.applyStroke({ mode, radius: Number(brushSize.value), path: stroke });
      drawMask(ctx, preview, CELL, 0.45);
    }
  }
});
canvas.addEventListener("pointerup", () => {
  if (session && stroke) {
    session.history.apply({ mode, radius: Number(brushSize.value), path: stroke });
    stroke = null;
    redraw();
  }
});

el<HTMLButtonElement>("paint").addEventListener("click", () => {
  mode = "paint";
  el<HTMLButtonElement>("paint").classList.add("active");
  el<HTMLButtonElement>("erase").classList.remove("active");
});
el<HTMLButtonElement>("erase").addEventListener("click", () => {
  mode = "erase";
  el<HTMLButtonElement>("erase").classList.add("active");
  el<HTMLButtonElement>("paint").classList.remove("active");
});
el<HTMLButtonElement>("undo").addEventListener("click", () => {
  session?.history.undo();
  redraw();
});
el<HTMLButtonElement>("redo").addEventListener("click", () => {
  session?.history.redo();
  redraw();
});
el<HTMLButtonElement>("clear").addEventListener("click", () => {
  session?.history.clear();
  redraw();
});
opacity.addEventListener("input", redraw);

el<HTMLButtonElement>("submit").addEventListener("click", async () => {
  if (!session) {
    setBanner("load a topogram first");
    return;
  }
  setBanner("reconstructing…", "info");
  const applied = await session.submit();
  if (session.lastError) {
    setBanner(session.lastError);
  } else if (applied) {
    setBanner(null);
    showResult();
  }
});

el<HTMLButtonElement>("load-sample").addEventListener("click", async () => {
  const res = await fetch("sample_topogram.pgm");
  if (!res.ok) {
    setBanner("no sample topogram bundled; choose a file instead");
    return;
  }
  await loadTopogram(new Uint8Array(await res.arrayBuffer()));
});
