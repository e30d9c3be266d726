/** View state for the search page and its pure transitions.
 *
 * Loading and error are mutually exclusive by construction: every transition
 * that sets one clears the other. Results always appear exactly as the server
 * delivered them; no transition reorders, filters, or rescales.
 */

import type { ResultCard, SearchResponse } from "./api.js";

export type ErrorNotice =
  | { kind: "validation"; message: string }
  | { kind: "index-loading"; message: string }
  | { kind: "network"; message: string };

export interface SearchViewState {
  query: string;
  loading: boolean;
  results: ResultCard[];
  summary: string;
  answerSpans: string[];
  error: ErrorNotice | null;
  searched: boolean;
}

export const initialState: SearchViewState = {
  query: "",
  loading: false,
  results: [],
  summary: "",
  answerSpans: [],
  error: null,
  searched: false,
};

export function startSearch(state: SearchViewState, query: string): SearchViewState {
  return { ...state, query, loading: true, error: null };
}

export function finishSearch(state: SearchViewState, response: SearchResponse): SearchViewState {
  return {
    ...state,
    loading: false,
    error: null,
    results: response.results,
    summary: response.summary,
    answerSpans: response.answer_spans,
    searched: true,
  };
}

/** Keeps the previous results visible so the user can refine from them. */
export function failSearch(state: SearchViewState, notice: ErrorNotice): SearchViewState {
  return { ...state, loading: false, error: notice };
}

export function rejectInput(state: SearchViewState, message: string): SearchViewState {
  return { ...state, loading: false, error: { kind: "validation", message } };
}
