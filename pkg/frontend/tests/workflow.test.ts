/** Acceptance: the load -> submit -> annotate -> resubmit loop. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { AnnotationSession, SessionError } from "../src/session";
import { mockService, RecordedCall, sampleTopogramBytes, MODELS } from "./helpers";

describe("annotation workflow", () => {
  it("routes maskless submits to the topogram-only model, masked ones to the mask model, and the volume readout changes", async () => {
    const calls: RecordedCall[] = [];
    const client = new ApiClient("", mockService(calls, { volumes: [900, 1500] }));
    const session = await AnnotationSession.load(client, sampleTopogramBytes());
    expect(calls.some((c) => c.url.endsWith("/v1/models"))).toBe(true);
    expect(session.history.current.isEmpty()).toBe(true);

    expect(await session.submit()).toBe(true);
    const first = calls.filter((c) => c.body).at(-1)!.body!;
    expect(first.model_id).toBe("scout-only");
    expect(first.mask).toBeUndefined();
    const volumeBefore = session.latest!.volume_ml;

    session.history.apply({ mode: "paint", radius: 4, path: [{ x: 30, y: 30 }, { x: 36, y: 34 }] });
    expect(await session.submit()).toBe(true);
    const second = calls.filter((c) => c.body).at(-1)!.body!;
    expect(second.model_id).toBe("scout-mask");
    expect(second.mask).toBeDefined();
    expect(session.latest!.volume_ml).not.toBe(volumeBefore);
    expect(session.latest!.model_id).toBe("scout-mask");
  });

  it("rejects topograms of the wrong size with a user-visible message", async () => {
    const client = new ApiClient("", mockService([]));
    await expect(AnnotationSession.load(client, sampleTopogramBytes(64))).rejects.toThrow(/256x256/);
  });

  it("rejects non-image files with a user-visible message", async () => {
    const client = new ApiClient("", mockService([]));
    const junk = new TextEncoder().encode("definitely not a pgm");
    await expect(AnnotationSession.load(client, junk)).rejects.toThrow(SessionError);
  });

  it("surfaces service errors verbatim with the request id attached", async () => {
    const fetchFn = async (url: string): Promise<Response> => {
      if (url.endsWith("/v1/models")) return new Response(JSON.stringify(MODELS), { status: 200 });
      return new Response(JSON.stringify({ detail: "unknown model 'scout-only'" }), { status: 404 });
    };
    const client = new ApiClient("", fetchFn);
    const session = await AnnotationSession.load(client, sampleTopogramBytes());
    expect(await session.submit()).toBe(false);
    expect(session.lastError).toMatch(/404/);
    expect(session.lastError).toMatch(/unknown model/);
  });

  it("discards stale responses superseded by a newer submit", async () => {
    const calls: RecordedCall[] = [];
    const gates = new Map<string, () => void>();
    const fetchFn = mockService(calls, {
      volumes: [700, 2000],
      gate: (req) =>
        new Promise<void>((resolve) => {
          gates.set(req.request_id, resolve);
        }),
    });
    const client = new ApiClient("", fetchFn);
    const session = await AnnotationSession.load(client, sampleTopogramBytes());

    const first = session.submit(); // maskless -> volume 700, delayed
    session.history.apply({ mode: "paint", radius: 3, path: [{ x: 20, y: 20 }] });
    const second = session.submit(); // masked -> volume 2000, delayed

    // resolve the NEWER response first, then the stale one
    await Promise.resolve();
    gates.get("req-2")!();
    expect(await second).toBe(true);
    expect(session.latest!.volume_ml).toBe(2000);

    gates.get("req-1")!();
    expect(await first).toBe(false); // stale: discarded
    expect(session.latest!.volume_ml).toBe(2000);
    expect(session.latest!.request_id).toBe("req-2");
  });
});
