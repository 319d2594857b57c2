// Typed client for the scoring service. All server interaction lives here;
// the UI holds no model logic.

export type CatalogResponse = {
  courses: string[];
  failure_rates: Record<string, number>;
};

export type GradeEntry = { course: string; grade: number | "R" };
export type HistoryPeriod = { period: string; grades: GradeEntry[] };

export type ScoreRequest = {
  history: HistoryPeriod[];
  candidates: string[][];
};

export type ScoreResponse = {
  probabilities: number[];
  ranking: number[];
  checkpoint: string;
};

export type ApiError =
  | { kind: "network"; detail: string }
  | { kind: "bad_request"; error: string; detail?: string }
  | { kind: "unknown_course"; course: string }
  | { kind: "server"; status: number };

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async fetchCatalog(): Promise<CatalogResponse> {
    const response = await this.request("/v1/catalog", undefined);
    return (await response.json()) as CatalogResponse;
  }

  async score(body: ScoreRequest): Promise<ScoreResponse> {
    const response = await this.request("/v1/score", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()) as ScoreResponse;
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw { kind: "network", detail: String(err) } satisfies ApiError;
    }
    if (response.ok) return response;

    let payload: { error?: string; course?: string; detail?: string } = {};
    try {
      payload = await response.json();
    } catch {
      // non-JSON error body: fall through to status-based mapping
    }
    if (response.status === 422 && payload.error === "unknown_course") {
      throw { kind: "unknown_course", course: payload.course ?? "?" } satisfies ApiError;
    }
    if (response.status === 400) {
      throw {
        kind: "bad_request",
        error: payload.error ?? "invalid_request",
        detail: payload.detail,
      } satisfies ApiError;
    }
    throw { kind: "server", status: response.status } satisfies ApiError;
  }
}
