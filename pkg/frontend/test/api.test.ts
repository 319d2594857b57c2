import { describe, expect, it } from "vitest";

import { ServiceClient, type ApiError, type FetchLike } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

const SCORE_BODY = {
  history: [{ period: "2020-1", grades: [{ course: "ALG1", grade: 15 as const }] }],
  candidates: [["ALG1"]],
};

describe("ServiceClient", () => {
  it("fetches the catalog", async () => {
    const stub: FetchLike = async (url) => {
      expect(url).toBe("http://svc/v1/catalog");
      return jsonResponse(200, { courses: ["A"], failure_rates: { A: 0.4 } });
    };
    const client = new ServiceClient("http://svc", stub);
    const catalog = await client.fetchCatalog();
    expect(catalog.courses).toEqual(["A"]);
    expect(catalog.failure_rates.A).toBeCloseTo(0.4);
  });

  it("posts score requests with a JSON body", async () => {
    const stub: FetchLike = async (url, init) => {
      expect(url).toBe("http://svc/v1/score");
      expect(init?.method).toBe("POST");
      expect(JSON.parse(String(init?.body))).toEqual(SCORE_BODY);
      return jsonResponse(200, { probabilities: [0.5], ranking: [0], checkpoint: "x" });
    };
    const response = await new ServiceClient("http://svc", stub).score(SCORE_BODY);
    expect(response.probabilities).toEqual([0.5]);
  });

  it("maps 422 to unknown_course", async () => {
    const stub: FetchLike = async () =>
      jsonResponse(422, { error: "unknown_course", course: "NOPE" });
    const err = await new ServiceClient("http://svc", stub)
      .score(SCORE_BODY)
      .catch((e: ApiError) => e);
    expect(err).toEqual({ kind: "unknown_course", course: "NOPE" });
  });

  it("maps 400 to bad_request with the error code", async () => {
    const stub: FetchLike = async () =>
      jsonResponse(400, { error: "empty_history", detail: "history must be non-empty" });
    const err = await new ServiceClient("http://svc", stub)
      .score(SCORE_BODY)
      .catch((e: ApiError) => e);
    expect(err).toMatchObject({ kind: "bad_request", error: "empty_history" });
  });

  it("maps thrown fetch failures to network errors", async () => {
    const stub: FetchLike = async () => {
      throw new Error("ECONNREFUSED");
    };
    const err = await new ServiceClient("http://svc", stub)
      .fetchCatalog()
      .catch((e: ApiError) => e);
    expect(err).toMatchObject({ kind: "network" });
  });

  it("maps 500 to a server error", async () => {
    const stub: FetchLike = async () => jsonResponse(500, { error: "internal" });
    const err = await new ServiceClient("http://svc", stub)
      .score(SCORE_BODY)
      .catch((e: ApiError) => e);
    expect(err).toEqual({ kind: "server", status: 500 });
  });
});
