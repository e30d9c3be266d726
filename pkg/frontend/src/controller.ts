/** Wires the search form, parameter knobs, and output region together.
 *
 * At most one search is in flight; submitting again aborts the previous
 * request, and a sequence ticket drops any response that still lands late,
 * so the view always shows the newest submission.
 */

import {
  ApiError,
  DEFAULT_PARAMS,
  fetchHealth,
  fetchSearch,
  hasQueryTokens,
  validateParams,
  type FetchLike,
  type SearchParams,
} from "./api.js";
import {
  failSearch,
  finishSearch,
  initialState,
  rejectInput,
  startSearch,
  type ErrorNotice,
  type SearchViewState,
} from "./state.js";
import { renderResults } from "./view.js";

export interface ControllerOptions {
  base?: string;
  fetchFn?: FetchLike;
}

function noticeFor(error: unknown): ErrorNotice {
  if (error instanceof ApiError) {
    if (error.status === 503) {
      return { kind: "index-loading", message: `index loading: ${error.message}` };
    }
    return { kind: "validation", message: error.message };
  }
  return { kind: "network", message: "search request failed; backend unreachable?" };
}

function knobInput(name: string, label: string, value: number, step: string): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = `knob knob-${name}`;
  const text = document.createElement("span");
  text.textContent = label;
  const input = document.createElement("input");
  input.type = "number";
  input.name = name;
  input.step = step;
  input.value = String(value);
  wrap.append(text, input);
  return wrap;
}

export class SearchController {
  private readonly base: string;
  private readonly fetchFn: FetchLike;
  private state: SearchViewState = initialState;
  private inflight: AbortController | null = null;
  private ticket = 0;

  private readonly queryInput: HTMLInputElement;
  private readonly knobInputs: Record<"mu" | "rrf_k" | "n", HTMLInputElement>;
  private readonly healthLine: HTMLElement;
  private readonly output: HTMLElement;

  constructor(root: HTMLElement, options: ControllerOptions = {}) {
    this.base = options.base ?? "";
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));

    const header = document.createElement("header");
    const title = document.createElement("h1");
    title.textContent = "scisearch";
    this.healthLine = document.createElement("p");
    this.healthLine.className = "health";
    header.append(title, this.healthLine);

    const form = document.createElement("form");
    form.className = "search-form";
    this.queryInput = document.createElement("input");
    this.queryInput.type = "search";
    this.queryInput.name = "q";
    this.queryInput.placeholder = "search the corpus";
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Search";

    const knobs = document.createElement("fieldset");
    knobs.className = "knobs";
    knobs.append(
      knobInput("mu", "mu", DEFAULT_PARAMS.mu, "0.05"),
      knobInput("rrf_k", "rrf_k", DEFAULT_PARAMS.rrfK, "1"),
      knobInput("n", "n", DEFAULT_PARAMS.n, "1"),
    );
    const reset = document.createElement("button");
    reset.type = "button";
    reset.className = "reset";
    reset.textContent = "Reset";
    reset.addEventListener("click", () => this.reset());
    knobs.append(reset);

    form.append(this.queryInput, submit, knobs);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });

    this.output = document.createElement("main");
    this.output.className = "output";

    root.replaceChildren(header, form, this.output);
    this.knobInputs = {
      mu: form.querySelector<HTMLInputElement>("input[name=mu]")!,
      rrf_k: form.querySelector<HTMLInputElement>("input[name=rrf_k]")!,
      n: form.querySelector<HTMLInputElement>("input[name=n]")!,
    };
    this.render();
  }

  params(): SearchParams {
    return {
      mu: Number(this.knobInputs.mu.value),
      rrfK: Number(this.knobInputs.rrf_k.value),
      n: Number(this.knobInputs.n.value),
    };
  }

  reset(): void {
    this.knobInputs.mu.value = String(DEFAULT_PARAMS.mu);
    this.knobInputs.rrf_k.value = String(DEFAULT_PARAMS.rrfK);
    this.knobInputs.n.value = String(DEFAULT_PARAMS.n);
  }

  async submit(): Promise<void> {
    const query = this.queryInput.value;
    if (!hasQueryTokens(query)) {
      this.setState(rejectInput(this.state, "enter a query with at least one word"));
      return;
    }
    const params = this.params();
    const problem = validateParams(params);
    if (problem !== null) {
      this.setState(rejectInput(this.state, problem));
      return;
    }

    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const ticket = ++this.ticket;
    this.setState(startSearch(this.state, query));

    try {
      const response = await fetchSearch(this.base, query, params, this.fetchFn, controller.signal);
      if (ticket !== this.ticket) {
        return;
      }
      this.setState(finishSearch(this.state, response));
    } catch (error) {
      if (ticket !== this.ticket) {
        return;
      }
      if (error instanceof DOMException && error.name === "AbortError") {
        return;
      }
      this.setState(failSearch(this.state, noticeFor(error)));
    }
  }

  async checkHealth(): Promise<void> {
    try {
      const health = await fetchHealth(this.base, this.fetchFn);
      this.healthLine.textContent = health.ready
        ? `${health.documents} documents, ${health.paragraphs} paragraphs indexed`
        : "index loading";
    } catch {
      this.healthLine.textContent = "backend unreachable";
    }
  }

  private setState(next: SearchViewState): void {
    this.state = next;
    this.render();
  }

  private render(): void {
    renderResults(this.output, this.state, () => void this.submit());
  }
}
