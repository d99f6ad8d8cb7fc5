import { describe, expect, it, vi } from "vitest";

import { ApiError, MskgApi } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("MskgApi", () => {
  it("posts questions to /qa with a JSON body", async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(200, {
        intent: "graph_query",
        summary: "s",
        provenance: "p",
        columns: ["count(m)"],
        rows: [[3]],
      }),
    );
    const api = new MskgApi("http://h:1", fetchFn);
    const answer = await api.qa("how many?");
    expect(answer.rows).toEqual([[3]]);
    expect(fetchFn).toHaveBeenCalledWith("http://h:1/qa", {
      method: "POST",
      headers: { "Content-Type": "text/plain;charset=utf-8" },
      body: JSON.stringify({ question: "how many?" }),
    });
  });

  it("builds recommend URLs with encoded ids and query params", async () => {
    const fetchFn = vi.fn(async (_input: string, _init?: RequestInit) =>
      jsonResponse(200, { id: "a.com", method: "graphsage", k: 5, ranking: [] }),
    );
    const api = new MskgApi("http://h:1", fetchFn);
    await api.recommend("odd/id", 5, "graphsage", true);
    expect(fetchFn.mock.calls[0]?.[0]).toBe(
      "http://h:1/recommend/odd%2Fid?k=5&method=graphsage&include_self=true",
    );
  });

  it("defaults recommend to node2vec without self", async () => {
    const fetchFn = vi.fn(async (_input: string, _init?: RequestInit) =>
      jsonResponse(200, { id: "a.com", method: "node2vec", k: 10, ranking: [] }),
    );
    const api = new MskgApi("http://h:1", fetchFn);
    await api.recommend("a.com", 10);
    expect(fetchFn.mock.calls[0]?.[0]).toBe(
      "http://h:1/recommend/a.com?k=10&method=node2vec&include_self=false",
    );
  });

  it("maps error payloads to ApiError with the HTTP status", async () => {
    const api = new MskgApi("http://h:1", async () =>
      jsonResponse(404, { error: "unknown manufacturer nope.com" }),
    );
    const failure = await api.manufacturer("nope.com").catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(404);
    expect((failure as ApiError).message).toContain("nope.com");
  });

  it("keeps 422 guidance text for unsupported questions", async () => {
    const api = new MskgApi("http://h:1", async () =>
      jsonResponse(422, { error: "This question is outside the supported patterns." }),
    );
    const failure = await api.qa("???").catch((e: unknown) => e);
    expect((failure as ApiError).status).toBe(422);
    expect((failure as ApiError).message).toMatch(/outside the supported patterns/);
  });

  it("wraps network failures as status 0", async () => {
    const api = new MskgApi("http://h:1", async () => {
      throw new TypeError("fetch failed");
    });
    const failure = await api.health().catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(0);
  });

  it("rejects non-JSON bodies", async () => {
    const api = new MskgApi(
      "http://h:1",
      async () => new Response("<html>oops</html>", { status: 200 }),
    );
    const failure = await api.stats().catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).message).toContain("non-JSON");
  });

  it("fetches labels for encoded manufacturer ids", async () => {
    const fetchFn = vi.fn(async (_input: string, _init?: RequestInit) =>
      jsonResponse(200, { id: "a.com", labels: ["machining"], probabilities: [0.9], categories: [] }),
    );
    const api = new MskgApi("http://h:1", fetchFn);
    const labels = await api.labels("a.com");
    expect(labels.labels).toEqual(["machining"]);
    expect(fetchFn.mock.calls[0]?.[0]).toBe("http://h:1/labels/a.com");
  });
});
