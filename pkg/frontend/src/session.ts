/**
 * Annotation session: one loaded topogram, the editable mask with history,
 * and the submit loop against the reconstruction service.
 *
 * Submits route by mask content: an empty mask goes to a topogram-only
 * model, a non-empty one to a topogram+mask model. The topogram is sent as
 * its original file bytes (never re-encoded) and the mask as the exact
 * binarized canvas state. At most one response is displayed per submit
 * generation: responses that arrive after a newer submit are discarded by
 * request id.
 */

import { ApiClient, ModelInfo, ReconstructResponse } from "./api";
import { MaskHistory, MASK_DIM } from "./mask_state";
import { bytesToBase64, encodeMaskPgm, parsePgm, PgmImage } from "./pgm";

export const TOPO_DIM = 256;

const OUTPUTS = ["voxels", "mesh", "projection", "volume"];

export class SessionError extends Error {}

export class AnnotationSession {
  readonly history = new MaskHistory(MASK_DIM);
  models: ModelInfo[] = [];
  latest: ReconstructResponse | null = null;
  lastError: string | null = null;
  busy = false;
  private submitSeq = 0;
  private appliedSeq = 0;

  private constructor(
    private readonly client: ApiClient,
    readonly topogramBytes: Uint8Array,
    readonly topogram: PgmImage,
  ) {}

  static async load(client: ApiClient, topogramBytes: Uint8Array): Promise<AnnotationSession> {
    let image: PgmImage;
    try {
      image = parsePgm(topogramBytes);
    } catch (err) {
      throw new SessionError(`could not read topogram: ${(err as Error).message}`);
    }
    if (image.width !== TOPO_DIM || image.height !== TOPO_DIM) {
      throw new SessionError(
        `topogram must be ${TOPO_DIM}x${TOPO_DIM}, got ${image.width}x${image.height}`,
      );
    }
    const session = new AnnotationSession(client, topogramBytes, image);
    session.models = await client.listModels();
    return session;
  }

  /** Model picked by the routing rule for the current mask state. */
  routeModel(): ModelInfo {
    const wantMask = !this.history.current.isEmpty();
    const variant = wantMask ? "topogram+mask" : "topogram-only";
    const model = this.models.find((m) => m.variant === variant);
    if (!model) throw new SessionError(`no ${variant} model is loaded on the service`);
    return model;
  }

  /** Exact bytes the wire will carry for the current mask (or null if empty). */
  maskWireBytes(): Uint8Array | null {
    if (this.history.current.isEmpty()) return null;
    return encodeMaskPgm(this.history.current.data, this.history.current.dim);
  }

  async submit(): Promise<boolean> {
    this.lastError = null;
    const seq = ++this.submitSeq;
    const model = this.routeModel();
    const maskBytes = this.maskWireBytes();
    const request = {
      topogram: bytesToBase64(this.topogramBytes),
      ...(maskBytes ? { mask: bytesToBase64(maskBytes) } : {}),
      model_id: model.id,
      outputs: OUTPUTS,
      request_id: `req-${seq}`,
    };
    this.busy = true;
    try {
      const response = await this.client.reconstruct(request);
      if (seq <= this.appliedSeq || seq !== this.submitSeq) {
        return false; // a newer submit superseded this one
      }
      this.appliedSeq = seq;
      this.latest = response;
      return true;
    } catch (err) {
      if (seq === this.submitSeq) this.lastError = (err as Error).message;
      return false;
    } finally {
      if (seq === this.submitSeq) this.busy = false;
    }
  }
}
