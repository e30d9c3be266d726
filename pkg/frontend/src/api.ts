/** Typed client for the search service: GET /search and GET /health. */

export interface ResultCard {
  doc_id: string;
  title: string;
  snippet: string;
  final: number;
  rrf: number;
  q_factor: number;
  s_factor: number;
}

export interface SearchResponse {
  query: string;
  mu: number;
  rrf_k: number;
  count: number;
  results: ResultCard[];
  summary: string;
  answer_spans: string[];
}

export interface HealthResponse {
  status: string;
  ready: boolean;
  documents: number;
  paragraphs: number;
}

export interface SearchParams {
  mu: number;
  rrfK: number;
  n: number;
}

export const DEFAULT_PARAMS: SearchParams = { mu: 0.7, rrfK: 60, n: 10 };

export type FetchLike = (url: string, init?: { signal?: AbortSignal }) => Promise<Response>;

/** Raised for non-2xx responses, carrying the server's detail message. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

/** True when the text contains at least one letter or digit, mirroring the
 * server's tokenizer enough to block obviously empty queries client-side. */
export function hasQueryTokens(text: string): boolean {
  return /[\p{L}\p{N}]/u.test(text);
}

/** Returns a human-readable problem with the knob values, or null when valid.
 * Messages match the server's 400 details so both paths read the same. */
export function validateParams(params: SearchParams): string | null {
  const { mu, rrfK, n } = params;
  if (!Number.isFinite(mu) || mu < 0 || mu > 1) {
    return "mu must be in [0, 1]";
  }
  if (!Number.isFinite(rrfK) || rrfK <= 0) {
    return "rrf_k must be > 0";
  }
  if (!Number.isInteger(n) || n < 0 || n > 100) {
    return "n must be in [0, 100]";
  }
  return null;
}

/** Builds the /search URL. Knob values are always sent explicitly so the
 * request records exactly what the user asked for. */
export function searchUrl(base: string, query: string, params: SearchParams): string {
  const qs = new URLSearchParams();
  qs.set("q", query);
  qs.set("n", String(params.n));
  qs.set("mu", String(params.mu));
  qs.set("rrf_k", String(params.rrfK));
  return `${base}/search?${qs.toString()}`;
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
  } catch {
    // fall through to the generic message
  }
  return `request failed with status ${response.status}`;
}

export async function fetchSearch(
  base: string,
  query: string,
  params: SearchParams,
  fetchFn: FetchLike,
  signal?: AbortSignal,
): Promise<SearchResponse> {
  const response = await fetchFn(searchUrl(base, query, params), { signal });
  if (!response.ok) {
    throw new ApiError(response.status, await errorDetail(response));
  }
  return (await response.json()) as SearchResponse;
}

export async function fetchHealth(base: string, fetchFn: FetchLike): Promise<HealthResponse> {
  const response = await fetchFn(`${base}/health`);
  if (!response.ok) {
    throw new ApiError(response.status, await errorDetail(response));
  }
  return (await response.json()) as HealthResponse;
}
