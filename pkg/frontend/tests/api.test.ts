import { describe, expect, it, vi } from "vitest";

import { ReviewApi, ServiceApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ReviewApi", () => {
  it("returns null on an empty queue (204)", async () => {
    const fetchImpl = vi.fn(async () => new Response(null, { status: 204 }));
    const api = new ReviewApi("http://svc", fetchImpl as unknown as typeof fetch);
    expect(await api.nextTask("run-1")).toBeNull();
    expect(fetchImpl).toHaveBeenCalledWith("http://svc/api/runs/run-1/tasks/next");
  });

  it("parses a claimed task", async () => {
    const task = { task_id: "t1", draft: "text", tables: [], status: "claimed" };
    const fetchImpl = vi.fn(async () => jsonResponse(task));
    const api = new ReviewApi("http://svc", fetchImpl as unknown as typeof fetch);
    const received = await api.nextTask("run-1");
    expect(received?.task_id).toBe("t1");
  });

  it("raises typed errors from {code, message} bodies", async () => {
    const fetchImpl = vi.fn(async () =>
      jsonResponse({ code: "not_found", message: "run missing" }, 404),
    );
    const api = new ReviewApi("http://svc", fetchImpl as unknown as typeof fetch);
    const err = await api.nextTask("run-x").catch((e) => e);
    expect(err).toBeInstanceOf(ServiceApiError);
    expect(err.status).toBe(404);
    expect(err.code).toBe("not_found");
  });

  it("submits the corrected text verbatim", async () => {
    const fetchImpl = vi.fn(async () =>
      jsonResponse({ task_id: "t1", status: "done", duplicate: false }),
    );
    const api = new ReviewApi("http://svc", fetchImpl as unknown as typeof fetch);
    const text = "kept  spacing , and punctuation.";
    await api.submitAnnotation("t1", text);
    const [, options] = fetchImpl.mock.calls[0] as unknown as [string, RequestInit];
    expect(JSON.parse(options.body as string)).toEqual({ corrected_text: text });
  });

  it("recovers by retrying after a network drop, idempotently", async () => {
    let calls = 0;
    const fetchImpl = vi.fn(async () => {
      calls += 1;
      if (calls === 1) throw new TypeError("network dropped");
      return jsonResponse({ task_id: "t1", status: "done", duplicate: calls > 2 });
    });
    const api = new ReviewApi("http://svc", fetchImpl as unknown as typeof fetch);
    await expect(api.submitAnnotation("t1", "edited")).rejects.toThrow("network dropped");
    const ack = await api.submitAnnotation("t1", "edited");
    expect(ack.status).toBe("done");
  });
});
