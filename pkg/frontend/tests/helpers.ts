import { ModelInfo, ReconstructRequest, ReconstructResponse } from "../src/api";
import { TOPO_DIM } from "../src/session";

export const MODELS: ModelInfo[] = [
  { id: "scout-only", variant: "topogram-only", dims: { grid_dim: 64, topo_dim: 256, mask_dim: 64, latent_dim: 200 }, epoch: 250 },
  { id: "scout-mask", variant: "topogram+mask", dims: { grid_dim: 64, topo_dim: 256, mask_dim: 64, latent_dim: 200 }, epoch: 250 },
];

/** Synthetic 16-bit 256x256 topogram file bytes (a radial gradient). */
export function sampleTopogramBytes(dim: number = TOPO_DIM): Uint8Array {
  const header = `P5\n${dim} ${dim}\n65535\n`;
  const out = new Uint8Array(header.length + dim * dim * 2);
  for (let i = 0; i < header.length; i++) out[i] = header.charCodeAt(i);
  const c = (dim - 1) / 2;
  let o = header.length;
  for (let y = 0; y < dim; y++) {
    for (let x = 0; x < dim; x++) {
      const r = Math.hypot(x - c, y - c) / c;
      const v = Math.round(Math.max(0, 1 - r) * 60000);
      out[o++] = v >> 8;
      out[o++] = v & 0xff;
    }
  }
  return out;
}

export interface RecordedCall {
  url: string;
  body?: ReconstructRequest;
}

export interface MockOptions {
  /** volume reported for (maskless, masked) requests */
  volumes?: [number, number];
  /** per-request gate: await before answering (for stale-response tests) */
  gate?: (req: ReconstructRequest) => Promise<void>;
}

/** fetch stub covering /v1/models and /v1/reconstruct. */
export function mockService(calls: RecordedCall[], opts: MockOptions = {}) {
  const [volPlain, volMasked] = opts.volumes ?? [1000, 1234];
  return async (url: string, init?: RequestInit): Promise<Response> => {
    if (url.endsWith("/v1/models")) {
      calls.push({ url });
      return new Response(JSON.stringify(MODELS), { status: 200 });
    }
    if (url.endsWith("/v1/reconstruct")) {
      const req = JSON.parse(String(init?.body)) as ReconstructRequest;
      calls.push({ url, body: req });
      if (opts.gate) await opts.gate(req);
      const body: ReconstructResponse = {
        volume_ml: req.mask ? volMasked : volPlain,
        latency_ms: 12,
        model_id: req.model_id,
        request_id: req.request_id,
        mesh: "# mesh\nv 0.0 0.0 0.0\nv 1.0 0.0 0.0\nv 0.0 1.0 0.0\nf 1 2 3\n",
      };
      return new Response(JSON.stringify(body), { status: 200 });
    }
    return new Response("not found", { status: 404 });
  };
}
