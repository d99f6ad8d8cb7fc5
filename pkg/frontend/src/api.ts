/** Typed client for the mskg HTTP service.
 *
 * Thin by design: it moves bytes and decodes JSON, nothing else. All
 * numbers shown anywhere in the UI originate here, untouched.
 */

export type Cell = string | number | null;

export interface QaResponse {
  intent: string;
  summary: string;
  provenance: string;
  columns: string[];
  rows: Cell[][];
  query?: string;
  method?: string;
  k?: number;
  ranking?: RankedManufacturer[];
  labels?: string[];
  probabilities?: number[];
}

export interface QueryResponse {
  columns: string[];
  rows: Cell[][];
}

export interface HealthResponse {
  status: string;
  snapshot: Record<string, unknown> | null;
}

export interface GraphStats {
  entities: Record<string, number>;
  relationships: Record<string, number>;
  total_entities: number;
  total_relationships: number;
  dataset_hash: string | null;
}

export interface WeightedNeighbor {
  id: string;
  name: string;
  weight: number;
}

export interface ManufacturerDetail {
  id: string;
  name: string;
  services: WeightedNeighbor[];
  certifications: WeightedNeighbor[];
  locations: WeightedNeighbor[];
}

export interface LabelsResponse {
  id: string;
  labels: string[];
  probabilities: number[];
  categories: string[];
}

export interface RankedManufacturer {
  id: string;
  similarity: number;
}

export interface RecommendResponse {
  id: string;
  method: string;
  k: number;
  ranking: RankedManufacturer[];
}

export type EmbeddingMethod = "node2vec" | "graphsage";

/** Non-2xx responses surface as this; `status` drives the UI reaction
 * (404 unknown-manufacturer panel, 422 guidance, everything else a
 * generic inline error with retry). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class MskgApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (cause) {
      throw new ApiError(0, `cannot reach ${this.baseUrl}: ${String(cause)}`);
    }
    const text = await response.text();
    let body: unknown = null;
    if (text.length > 0) {
      try {
        body = JSON.parse(text);
      } catch {
        throw new ApiError(response.status, `non-JSON response from ${path}`);
      }
    }
    if (!response.ok) {
      const detail =
        body !== null && typeof body === "object" && "error" in body
          ? String((body as { error: unknown }).error)
          : text;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    // text/plain keeps the request CORS-simple (no preflight); the service
    // parses the body as JSON regardless of the declared type.
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "text/plain;charset=utf-8" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request<HealthResponse>("/health");
  }

  stats(): Promise<GraphStats> {
    return this.request<GraphStats>("/graph/stats");
  }

  qa(question: string): Promise<QaResponse> {
    return this.post<QaResponse>("/qa", { question });
  }

  query(msql: string): Promise<QueryResponse> {
    return this.post<QueryResponse>("/query", { msql });
  }

  manufacturer(id: string): Promise<ManufacturerDetail> {
    return this.request<ManufacturerDetail>(
      `/manufacturers/${encodeURIComponent(id)}`,
    );
  }

  labels(id: string): Promise<LabelsResponse> {
    return this.request<LabelsResponse>(`/labels/${encodeURIComponent(id)}`);
  }

  recommend(
    id: string,
    k: number,
    method: EmbeddingMethod = "node2vec",
    includeSelf = false,
  ): Promise<RecommendResponse> {
    const params = new URLSearchParams({
      k: String(k),
      method,
      include_self: includeSelf ? "true" : "false",
    });
    return this.request<RecommendResponse>(
      `/recommend/${encodeURIComponent(id)}?${params.toString()}`,
    );
  }
}
