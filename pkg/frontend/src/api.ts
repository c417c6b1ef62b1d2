/** Typed client for the reconstruction service. */

export interface ModelInfo {
  id: string;
  variant: string;
  dims: { grid_dim: number; topo_dim: number; mask_dim: number; latent_dim: number };
  epoch: number;
}

export interface ReconstructRequest {
  topogram: string;
  mask?: string;
  model_id: string;
  outputs: string[];
  threshold?: number;
  request_id: string;
}

export interface ReconstructResponse {
  voxels?: string;
  mesh?: string;
  projection?: string;
  volume_ml: number;
  latency_ms: number;
  model_id: string;
  request_id: string;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string, readonly requestId?: string) {
    super(`service error ${status}: ${detail}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  async listModels(): Promise<ModelInfo[]> {
    const res = await this.fetchFn(`${this.baseUrl}/v1/models`);
    if (!res.ok) throw new ApiError(res.status, await res.text());
    return (await res.json()) as ModelInfo[];
  }

  async reconstruct(req: ReconstructRequest): Promise<ReconstructResponse> {
    const res = await this.fetchFn(`${this.baseUrl}/v1/reconstruct`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
    if (!res.ok) {
      let detail = await res.text();
      try {
        detail = (JSON.parse(detail) as { detail?: string }).detail ?? detail;
      } catch {
        // plain-text error body
      }
      throw new ApiError(res.status, detail, req.request_id);
    }
    return (await res.json()) as ReconstructResponse;
  }
}
