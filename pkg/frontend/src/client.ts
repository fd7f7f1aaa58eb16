/** Thin fetch wrapper over the documented service endpoints.
 *
 * The only configuration is the base URL; there are no private endpoints
 * and no client-side ranking — responses are passed through untouched.
 */

import type {
  FeedbackRequest,
  HealthView,
  NarrativeView,
  QueryRequest,
  QueryResult,
  SubgraphExport,
  TxView,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    public status: number,
    public body: string,
  ) {
    super(`service error ${status}: ${body}`);
  }
}

export class NetworkError extends Error {}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private baseUrl: string;

  constructor(
    baseUrl: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new NetworkError(String(err));
    }
    if (!res.ok) {
      throw new ServiceError(res.status, await res.text());
    }
    return (await res.json()) as T;
  }

  query(req: QueryRequest): Promise<QueryResult> {
    return this.request("/v1/query", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getTx(txId: string): Promise<TxView> {
    return this.request(`/v1/tx/${encodeURIComponent(txId)}`);
  }

  getSubgraph(addr: string, k: number): Promise<SubgraphExport> {
    return this.request(`/v1/subgraph/${encodeURIComponent(addr)}?k=${k}`);
  }

  getNarrative(txId: string): Promise<NarrativeView> {
    return this.request(`/v1/narrative/${encodeURIComponent(txId)}`);
  }

  postFeedback(fb: FeedbackRequest): Promise<{ status: string }> {
    return this.request("/v1/feedback", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(fb),
    });
  }

  health(): Promise<HealthView> {
    return this.request("/v1/health");
  }
}
