/** Shared fixtures and a controllable fetch mock for the UI tests. */

import type { FetchLike, SearchResponse } from "../src/api.js";
import { SearchController } from "../src/controller.js";

export function fixtureResponse(overrides: Partial<SearchResponse> = {}): SearchResponse {
  return {
    query: "ace2 receptor binding",
    mu: 0.7,
    rrf_k: 60.0,
    count: 3,
    results: [
      {
        doc_id: "c1",
        title: "Spike protein receptor binding",
        snippet: "The spike protein binds the ace2 receptor on host cells.",
        final: 0.04504606723839807,
        rrf: 0.03278688524590164,
        q_factor: 1.6105100000000008,
        s_factor: 0.8530869418824722,
      },
      {
        doc_id: "c3",
        title: "Genome assembly pipelines",
        snippet: "Assembly pipelines for viral genomes depend on read depth.",
        final: 0.011881113098957969,
        rrf: 0.016129032258064516,
        q_factor: 1.0,
        s_factor: 0.7366290121353941,
      },
      {
        doc_id: "c4",
        title: "Mask usage and transmission",
        snippet: "Compliance varies by region and season.",
        final: 0.010598612035472224,
        rrf: 0.015625,
        q_factor: 1.0,
        s_factor: 0.6783111702702383,
      },
    ],
    summary: "The spike protein binds the ace2 receptor on host cells.",
    answer_spans: ["The spike protein binds the ace2 receptor on host cells."],
    ...overrides,
  };
}

export interface RecordedCall {
  url: string;
  signal: AbortSignal | undefined;
  respond: (body: unknown, status?: number) => void;
  fail: (error?: unknown) => void;
}

/** Fetch stand-in that records every call and lets the test settle each one
 * by hand. With wireAbort (the default, matching real fetch) an aborted
 * signal rejects the pending promise with an AbortError. */
export function makeFetchMock(options: { wireAbort?: boolean } = {}): {
  calls: RecordedCall[];
  fetchFn: FetchLike;
} {
  const wireAbort = options.wireAbort ?? true;
  const calls: RecordedCall[] = [];
  const fetchFn: FetchLike = (url, init) =>
    new Promise<Response>((resolve, reject) => {
      if (wireAbort && init?.signal) {
        init.signal.addEventListener("abort", () => reject(new DOMException("aborted", "AbortError")));
      }
      calls.push({
        url,
        signal: init?.signal,
        respond: (body, status = 200) =>
          resolve(
            new Response(JSON.stringify(body), {
              status,
              headers: { "content-type": "application/json" },
            }),
          ),
        fail: (error = new TypeError("fetch failed")) => reject(error),
      });
    });
  return { calls, fetchFn };
}

export interface Mounted {
  controller: SearchController;
  root: HTMLElement;
  calls: RecordedCall[];
  setQuery: (text: string) => void;
  setKnob: (name: "mu" | "rrf_k" | "n", value: string) => void;
  submitForm: () => void;
}

export function mount(fetchMock?: { calls: RecordedCall[]; fetchFn: FetchLike }): Mounted {
  const { calls, fetchFn } = fetchMock ?? makeFetchMock();
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const controller = new SearchController(root, { fetchFn });
  return {
    controller,
    root,
    calls,
    setQuery: (text) => {
      root.querySelector<HTMLInputElement>("input[name=q]")!.value = text;
    },
    setKnob: (name, value) => {
      root.querySelector<HTMLInputElement>(`input[name=${name}]`)!.value = value;
    },
    submitForm: () => {
      root.querySelector("form")!.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    },
  };
}

export function tick(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export function searchParamsOf(url: string): URLSearchParams {
  return new URL(url, "http://test.local").searchParams;
}
