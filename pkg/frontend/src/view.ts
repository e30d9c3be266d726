/** DOM rendering for the search page.
 *
 * All content is inserted via textContent, never markup strings. Score cells
 * show a fixed-precision reading for scanning; the title tooltip carries
 * String(value), which round-trips to the exact number the server sent.
 */

import type { ResultCard } from "./api.js";
import type { SearchViewState } from "./state.js";

interface Segment {
  text: string;
  marked: boolean;
}

/** Splits text into plain and highlighted segments, marking every
 * case-insensitive occurrence of each span. Longer spans claim their ranges
 * first so a span nested inside another does not split its mark. */
export function highlightSegments(text: string, spans: string[]): Segment[] {
  const lower = text.toLowerCase();
  const claimed: Array<{ start: number; end: number }> = [];
  const ordered = [...spans].filter((s) => s.length > 0).sort((a, b) => b.length - a.length);
  for (const span of ordered) {
    const needle = span.toLowerCase();
    let from = 0;
    while (true) {
      const at = lower.indexOf(needle, from);
      if (at < 0) {
        break;
      }
      const range = { start: at, end: at + needle.length };
      if (!claimed.some((r) => range.start < r.end && r.start < range.end)) {
        claimed.push(range);
      }
      from = at + 1;
    }
  }
  claimed.sort((a, b) => a.start - b.start);
  const segments: Segment[] = [];
  let cursor = 0;
  for (const range of claimed) {
    if (range.start > cursor) {
      segments.push({ text: text.slice(cursor, range.start), marked: false });
    }
    segments.push({ text: text.slice(range.start, range.end), marked: true });
    cursor = range.end;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), marked: false });
  }
  return segments;
}

export function formatScore(value: number): string {
  return value.toFixed(6);
}

function scoreCell(label: string, value: number): HTMLElement {
  const cell = document.createElement("span");
  cell.className = `score score-${label}`;
  const name = document.createElement("span");
  name.className = "score-label";
  name.textContent = label;
  const num = document.createElement("span");
  num.className = "score-value";
  num.textContent = formatScore(value);
  num.title = String(value);
  cell.append(name, num);
  return cell;
}

function renderCard(card: ResultCard, rank: number, spans: string[]): HTMLElement {
  const item = document.createElement("article");
  item.className = "result-card";
  item.dataset.docId = card.doc_id;

  const heading = document.createElement("h3");
  const rankEl = document.createElement("span");
  rankEl.className = "rank";
  rankEl.textContent = String(rank);
  const titleEl = document.createElement("span");
  titleEl.className = "doc-title";
  titleEl.textContent = card.title;
  const idEl = document.createElement("span");
  idEl.className = "doc-id";
  idEl.textContent = card.doc_id;
  heading.append(rankEl, titleEl, idEl);

  const scores = document.createElement("div");
  scores.className = "scores";
  scores.append(
    scoreCell("final", card.final),
    scoreCell("rrf", card.rrf),
    scoreCell("q", card.q_factor),
    scoreCell("s", card.s_factor),
  );

  const snippet = document.createElement("p");
  snippet.className = "snippet";
  for (const segment of highlightSegments(card.snippet, spans)) {
    if (segment.marked) {
      const mark = document.createElement("mark");
      mark.textContent = segment.text;
      snippet.append(mark);
    } else {
      snippet.append(document.createTextNode(segment.text));
    }
  }

  item.append(heading, scores, snippet);
  return item;
}

function renderBanner(state: SearchViewState, onRetry: () => void): HTMLElement | null {
  if (!state.error) {
    return null;
  }
  const banner = document.createElement("div");
  banner.className = `banner banner-${state.error.kind}`;
  const message = document.createElement("span");
  message.className = "banner-message";
  message.textContent = state.error.message;
  banner.append(message);
  if (state.error.kind === "network") {
    const retry = document.createElement("button");
    retry.type = "button";
    retry.className = "retry";
    retry.textContent = "retry";
    retry.addEventListener("click", onRetry);
    banner.append(retry);
  }
  return banner;
}

/** Redraws the output region (banner, summary, spans, cards) from state. */
export function renderResults(output: HTMLElement, state: SearchViewState, onRetry: () => void): void {
  output.replaceChildren();

  const status = document.createElement("p");
  status.className = "search-status";
  if (state.loading) {
    status.textContent = "searching…";
  } else if (state.searched && !state.error) {
    const n = state.results.length;
    status.textContent = n === 1 ? "1 result" : `${n} results`;
  }
  if (status.textContent) {
    output.append(status);
  }

  const banner = renderBanner(state, onRetry);
  if (banner) {
    output.append(banner);
  }

  if (state.summary) {
    const block = document.createElement("section");
    block.className = "summary";
    const head = document.createElement("h2");
    head.textContent = "Summary";
    const body = document.createElement("p");
    body.textContent = state.summary;
    block.append(head, body);
    output.append(block);
  }

  if (state.answerSpans.length > 0) {
    const block = document.createElement("section");
    block.className = "answer-spans";
    const head = document.createElement("h2");
    head.textContent = "Answer spans";
    const list = document.createElement("ul");
    for (const span of state.answerSpans) {
      const item = document.createElement("li");
      item.textContent = span;
      list.append(item);
    }
    block.append(head, list);
    output.append(block);
  }

  const list = document.createElement("div");
  list.className = "result-list";
  state.results.forEach((card, i) => {
    list.append(renderCard(card, i + 1, state.answerSpans));
  });
  output.append(list);
}
