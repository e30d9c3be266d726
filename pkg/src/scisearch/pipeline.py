"""End-to-end search: retrieve, score answers and summary, rerank.

run_search is a pure function over an immutable snapshot, so concurrent
searches are safe; calls into a scorer that is not concurrency-safe are
serialized here.
"""

from __future__ import annotations

import logging
import threading
import weakref
from dataclasses import dataclass

from scisearch.corpus import Topic
from scisearch.fusion import EmptyQueryError, retrieve
from scisearch.evaluation import RunFile
from scisearch.index import tokenize
from scisearch.rank import AnswerSet, ReferenceScorer, Summary, rerank
from scisearch.snapshot import PipelineConfig, Snapshot, config_with_overrides

logger = logging.getLogger(__name__)

TOPIC_FIELDS = ("query", "question", "narrative", "concat")

_scorer_locks: "weakref.WeakKeyDictionary[object, threading.Lock]" = weakref.WeakKeyDictionary()
_locks_guard = threading.Lock()


def _scorer_lock(scorer: object) -> threading.Lock:
    with _locks_guard:
        lock = _scorer_locks.get(scorer)
        if lock is None:
            lock = threading.Lock()
            _scorer_locks[scorer] = lock
        return lock


@dataclass(frozen=True)
class SearchHit:
    doc_id: str
    title: str
    snippet: str
    final: float
    rrf: float
    q_factor: float
    s_factor: float


@dataclass
class SearchOutput:
    query: str
    results: list[SearchHit]
    summary: str
    answer_spans: list[str]
    config: PipelineConfig


def _snippet(snapshot: Snapshot, doc_id: str, answers: AnswerSet, best_key) -> str:
    from scisearch.rank import normalize_span

    doc = snapshot.doc_by_id[doc_id]
    normalized_doc = normalize_span(doc.full_text())
    for span in answers.spans:
        if normalize_span(span) in normalized_doc:
            return span
    best_text = snapshot.paragraph_text.get(best_key, "") if best_key else ""
    if not best_text:
        best_text = doc.full_text()
    return best_text[:200]


def _call_scorer(scorer, method: str, query: str, paragraphs: list[str]):
    fn = getattr(scorer, method)
    if getattr(scorer, "concurrency_safe", False):
        return fn(query, paragraphs)
    with _scorer_lock(scorer):
        return fn(query, paragraphs)


def run_search(
    snapshot: Snapshot,
    query: Topic | str,
    n: int | None = 10,
    mu: float | None = None,
    rrf_k: float | None = None,
    pool_size: int | None = None,
    scorer=None,
) -> SearchOutput:
    """Full pipeline: retrieval, answer spans, summary, modulated rerank."""
    config = config_with_overrides(snapshot.config, mu, rrf_k, pool_size)
    text = query.query if isinstance(query, Topic) else query
    result = retrieve(text, config.fusion, snapshot.indexes)

    paragraph_texts = [
        snapshot.paragraph_text[key]
        for key, _ in result.top_paragraphs[: config.scorer_paragraphs]
    ]
    if scorer is None:
        scorer = ReferenceScorer(snapshot.embedder, config.rank)
    spans = _call_scorer(scorer, "extract_answers", text, paragraph_texts)
    answers = AnswerSet.from_spans(spans, config.rank.max_spans)
    summary_text = _call_scorer(scorer, "summarize", text, paragraph_texts)
    summary_tokens = tokenize(summary_text)
    limit = config.rank.summary_token_limit
    if len(summary_tokens) >= limit:
        logger.warning(
            "scorer summary has %d tokens, truncating below %d", len(summary_tokens), limit
        )
        summary_text = " ".join(summary_tokens[: limit - 1])
        summary_tokens = summary_tokens[: limit - 1]
    summary = Summary(
        text=summary_text,
        token_length=len(summary_tokens),
        embedding=snapshot.embedder.embed(summary_text),
    )

    scores = rerank(
        result.fused, answers, summary, snapshot.doc_by_id,
        snapshot.paragraph_matrix, config.rank,
    )
    if n is not None:
        scores = scores[:n]
    hits = [
        SearchHit(
            doc_id=s.doc_id,
            title=snapshot.doc_by_id[s.doc_id].title,
            snippet=_snippet(snapshot, s.doc_id, answers, result.best_paragraph.get(s.doc_id)),
            final=s.final,
            rrf=s.rrf,
            q_factor=s.q_factor,
            s_factor=s.s_factor,
        )
        for s in scores
    ]
    return SearchOutput(
        query=text,
        results=hits,
        summary=summary.text,
        answer_spans=list(answers.spans),
        config=config,
    )


def topic_text(topic: Topic, field: str) -> str:
    if field == "query":
        return topic.query
    if field == "question":
        return topic.question
    if field == "narrative":
        return topic.narrative
    if field == "concat":
        return " ".join(t for t in (topic.query, topic.question, topic.narrative) if t)
    raise ValueError(f"unknown topic field: {field!r}")


def run_topics(
    snapshot: Snapshot,
    topics: list[Topic],
    field: str = "query",
    limit: int = 1000,
    scorer=None,
) -> RunFile:
    """Run the full pipeline per topic and collect a TREC run."""
    if field not in TOPIC_FIELDS:
        raise ValueError(f"unknown topic field: {field!r}")
    limit = min(limit, 1000)
    per_topic: dict[int, list[tuple[str, float]]] = {}
    for topic in sorted(topics, key=lambda t: t.id):
        try:
            output = run_search(snapshot, topic_text(topic, field), n=limit, scorer=scorer)
        except EmptyQueryError as exc:
            raise EmptyQueryError(f"topic {topic.id}: {exc}") from None
        per_topic[topic.id] = [(hit.doc_id, hit.final) for hit in output.results]
    return RunFile.from_ranked(per_topic, snapshot.config.run_tag)
