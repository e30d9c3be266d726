"""Rank modulation: answer spans, extractive summary, and the final score.

The final score of a document is s_factor * q_factor * rrf. Answer
extraction and summarization are pluggable; the reference implementations
here are deterministic so the whole pipeline is reproducible.
"""

from __future__ import annotations

import json
import math
import re
import subprocess
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from scisearch.corpus import Document
from scisearch.embedding import Embedder, cosine
from scisearch.fusion import RankedList
from scisearch.index import tokenize

_SENTENCE_RE = re.compile(r"(?<=[.?!])\s+")


class NothingToSummarizeError(ValueError):
    """Raised when summarize receives no paragraphs."""


@dataclass(frozen=True)
class RankConfig:
    answer_base: float = 1.1
    summary_blend: float = 0.5
    max_spans: int = 10
    summary_input_cap: int = 512
    summary_token_limit: int = 65
    first_sentences: int = 4

    def __post_init__(self) -> None:
        if self.answer_base < 1.0:
            raise ValueError(f"answer_base must be >= 1, got {self.answer_base}")
        if not 0.0 <= self.summary_blend <= 1.0:
            raise ValueError(f"summary_blend must be in [0, 1], got {self.summary_blend}")
        if self.max_spans < 1:
            raise ValueError(f"max_spans must be >= 1, got {self.max_spans}")


def normalize_span(text: str) -> str:
    """Case-fold and collapse whitespace for containment checks and dedup."""
    return " ".join(text.casefold().split())


@dataclass
class AnswerSet:
    spans: list[str]
    max_spans: int = 10

    def __post_init__(self) -> None:
        if len(self.spans) > self.max_spans:
            raise ValueError(f"{len(self.spans)} spans exceed max_spans={self.max_spans}")
        if any(not s for s in self.spans):
            raise ValueError("answer spans must be non-empty")

    @classmethod
    def from_spans(cls, spans: Iterable[str], max_spans: int = 10) -> "AnswerSet":
        """Normalize-dedup and cap spans from any scorer."""
        out: list[str] = []
        seen: set[str] = set()
        for span in spans:
            norm = normalize_span(span)
            if not norm or norm in seen:
                continue
            seen.add(norm)
            out.append(span)
            if len(out) == max_spans:
                break
        return cls(out, max_spans)


@dataclass
class Summary:
    text: str
    token_length: int
    embedding: np.ndarray


def split_sentences(text: str) -> list[str]:
    """Split on '.', '?', '!' followed by whitespace."""
    return [s.strip() for s in _SENTENCE_RE.split(text.strip()) if s.strip()]


def extract_answers(query: str, paragraphs: list[str], max_spans: int = 10) -> AnswerSet:
    """Top sentences by idf-weighted query-term overlap.

    idf is computed over the retrieved paragraphs themselves, so the scorer
    is self-contained. Ties break by first occurrence; duplicates collapse
    after normalization.
    """
    if not paragraphs:
        raise ValueError("extract_answers requires at least one paragraph")
    q_terms = set(tokenize(query))
    if not q_terms:
        return AnswerSet([], max_spans)
    df: dict[str, int] = {}
    for paragraph in paragraphs:
        for term in set(tokenize(paragraph)):
            df[term] = df.get(term, 0) + 1
    total = len(paragraphs)
    candidates: list[tuple[float, int, str]] = []
    seq = 0
    for paragraph in paragraphs:
        for sentence in split_sentences(paragraph):
            terms = set(tokenize(sentence))
            score = sum(
                math.log((1 + total) / (1 + df.get(t, 0))) + 1.0
                for t in q_terms & terms
            )
            if score > 0.0:
                candidates.append((score, seq, sentence))
            seq += 1
    candidates.sort(key=lambda c: (-c[0], c[1]))
    return AnswerSet.from_spans((c[2] for c in candidates), max_spans)


def count_contained_spans(answers: AnswerSet, doc_text: str) -> int:
    normalized = normalize_span(doc_text)
    return sum(1 for span in answers.spans if normalize_span(span) in normalized)


def q_factor(answers: AnswerSet, document: Document, base: float = 1.1) -> float:
    """base ** N where N counts answer spans contained in the document.

    Computed by repeated multiplication so one extra contained span
    multiplies the factor by exactly base.
    """
    n = count_contained_spans(answers, document.full_text())
    factor = 1.0
    for _ in range(n):
        factor *= base
    return factor


def s_factor(summary: Summary, paragraph_vectors: np.ndarray, blend: float = 0.5) -> float:
    """(1 - blend) + blend * max cosine between summary and doc paragraphs."""
    if paragraph_vectors.size == 0:
        return 1.0 - blend
    best = max(cosine(row, summary.embedding) for row in paragraph_vectors)
    return (1.0 - blend) + blend * best


def assemble_summary_input(
    paragraphs: list[str], first_sentences: int = 4, token_cap: int = 512
) -> list[str]:
    """First N sentences of each paragraph, in rank order, capped at token_cap.

    Assembly stops at the first sentence that would push the total past the
    cap. If the very first sentence alone exceeds it, that sentence is
    truncated to the cap so the input is never empty.
    """
    sentences: list[str] = []
    total = 0
    for paragraph in paragraphs:
        for sentence in split_sentences(paragraph)[:first_sentences]:
            n = len(tokenize(sentence))
            if total + n > token_cap:
                if not sentences:
                    sentences.append(" ".join(tokenize(sentence)[:token_cap]))
                return sentences
            sentences.append(sentence)
            total += n
    return sentences


def summarize(
    query: str,
    paragraphs: list[str],
    embedder: Embedder,
    cfg: RankConfig = RankConfig(),
) -> Summary:
    """Extractive summary: input sentences closest to their own centroid.

    Sentences are selected greedily by cosine to the centroid of all input
    sentence embeddings and stop before the output reaches the token limit.
    """
    if not paragraphs:
        raise NothingToSummarizeError("nothing to summarize")
    sentences = assemble_summary_input(
        paragraphs, cfg.first_sentences, cfg.summary_input_cap
    )
    embeddings = [embedder.embed(s) for s in sentences]
    centroid = np.mean(embeddings, axis=0)
    order = sorted(
        range(len(sentences)),
        key=lambda i: (-cosine(embeddings[i], centroid), i),
    )
    selected: list[str] = []
    total = 0
    for i in order:
        n = len(tokenize(sentences[i]))
        if total + n >= cfg.summary_token_limit:
            break
        selected.append(sentences[i])
        total += n
    if not selected:
        # The best sentence alone reaches the limit: emit a truncated span
        # rather than an empty summary.
        tokens = tokenize(sentences[order[0]])[: cfg.summary_token_limit - 1]
        selected = [" ".join(tokens)]
        total = len(tokens)
    text = " ".join(selected)
    return Summary(text=text, token_length=total, embedding=embedder.embed(text))


@dataclass(frozen=True)
class RankScore:
    doc_id: str
    rrf: float
    q_factor: float
    s_factor: float
    final: float


def rerank(
    retrieved: RankedList,
    answers: AnswerSet,
    summary: Summary,
    documents: Mapping[str, Document],
    paragraph_matrix: Callable[[str], np.ndarray],
    cfg: RankConfig = RankConfig(),
) -> list[RankScore]:
    """final = s_factor * q_factor * rrf, sorted descending, ties by doc_id."""
    scores: list[RankScore] = []
    for doc_id, rrf in retrieved:
        q = q_factor(answers, documents[doc_id], cfg.answer_base)
        s = s_factor(summary, paragraph_matrix(doc_id), cfg.summary_blend)
        scores.append(RankScore(doc_id, rrf, q, s, s * q * rrf))
    scores.sort(key=lambda r: (-r.final, r.doc_id))
    return scores


class ReferenceScorer:
    """In-process deterministic scorer implementing the plugin contract."""

    concurrency_safe = True

    def __init__(self, embedder: Embedder, cfg: RankConfig = RankConfig()):
        self.embedder = embedder
        self.cfg = cfg

    def extract_answers(self, query: str, paragraphs: list[str]) -> list[str]:
        return extract_answers(query, paragraphs, self.cfg.max_spans).spans

    def summarize(self, query: str, paragraphs: list[str]) -> str:
        return summarize(query, paragraphs, self.embedder, self.cfg).text


class SubprocessScorer:
    """Scorer speaking line-delimited JSON over a child process.

    Requests: {"op": "extract_answers"|"summarize", "query": ..., "paragraphs": [...]}
    Responses: {"spans": [...]} or {"summary": "..."}. Calls are serialized;
    the protocol has no concurrency story.
    """

    concurrency_safe = False

    def __init__(self, argv: list[str]):
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lock = threading.Lock()

    def _call(self, request: dict) -> dict:
        assert self._proc.stdin is not None and self._proc.stdout is not None
        with self._lock:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        if not line:
            raise RuntimeError("scorer subprocess closed its output")
        return json.loads(line)

    def extract_answers(self, query: str, paragraphs: list[str]) -> list[str]:
        response = self._call(
            {"op": "extract_answers", "query": query, "paragraphs": paragraphs}
        )
        return list(response["spans"])

    def summarize(self, query: str, paragraphs: list[str]) -> str:
        response = self._call(
            {"op": "summarize", "query": query, "paragraphs": paragraphs}
        )
        return str(response["summary"])

    def close(self) -> None:
        if self._proc.stdin is not None:
            self._proc.stdin.close()
        self._proc.wait(timeout=10)

    def __enter__(self) -> "SubprocessScorer":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
