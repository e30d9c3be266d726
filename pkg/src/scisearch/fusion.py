"""Score fusion: linear dense+TF-IDF combination, then reciprocal rank fusion.

retrieve() runs the retrieval half of the pipeline: dense paragraph search
reduced to per-document max cosine, linear combination with max-normalized
TF-IDF over a candidate pool, BM25 ranking, and RRF of the two rankings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from scisearch.corpus import Topic
from scisearch.embedding import Embedder
from scisearch.index import (
    Bm25Params,
    DenseIndex,
    InvertedIndex,
    ParagraphKey,
    bm25_scores_all,
    tfidf_scores_all,
    tokenize,
)


class EmptyQueryError(ValueError):
    """Raised when a query has no tokens and a signal-free embedding."""


@dataclass(frozen=True)
class FusionConfig:
    mu: float = 0.7
    rrf_k: float = 60.0
    pool_size: int = 1000
    normalize_tfidf: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must be in [0, 1], got {self.mu}")
        if self.rrf_k <= 0:
            raise ValueError(f"rrf_k must be > 0, got {self.rrf_k}")
        if self.pool_size < 1:
            raise ValueError(f"pool_size must be >= 1, got {self.pool_size}")


class RankedList:
    """Documents ordered by non-increasing score with 1-based rank lookup."""

    def __init__(self, entries: Sequence[tuple[str, float]]):
        self.entries: list[tuple[str, float]] = list(entries)
        seen: set[str] = set()
        prev = None
        for doc_id, score in self.entries:
            if doc_id in seen:
                raise ValueError(f"duplicate doc_id in ranked list: {doc_id!r}")
            seen.add(doc_id)
            if prev is not None and score > prev:
                raise ValueError(f"scores increase at doc {doc_id!r}")
            prev = score
        self._ranks: dict[str, int] = {
            doc_id: i + 1 for i, (doc_id, _) in enumerate(self.entries)
        }

    @classmethod
    def from_scores(cls, scores: Iterable[tuple[str, float]]) -> "RankedList":
        """Sort by descending score, ties by ascending doc_id."""
        ordered = sorted(scores, key=lambda e: (-e[1], e[0]))
        return cls(ordered)

    def rank_of(self, doc_id: str) -> int | None:
        return self._ranks.get(doc_id)

    def truncate(self, n: int) -> "RankedList":
        return RankedList(self.entries[:n])

    def doc_ids(self) -> list[str]:
        return [doc_id for doc_id, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RankedList) and self.entries == other.entries

    def __repr__(self) -> str:
        return f"RankedList({self.entries!r})"


def combine_score(max_cosine: float, tfidf_norm: float, mu: float) -> float:
    """Linear mix of the dense and keyword signals."""
    return mu * max_cosine + (1.0 - mu) * tfidf_norm


def rrf_fuse(list_c: RankedList, list_b: RankedList, k: float) -> RankedList:
    """Reciprocal rank fusion: score = Σ 1/(k + rank), absent list → 0 term."""
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    fused: dict[str, float] = {}
    for ranked in (list_c, list_b):
        for i, (doc_id, _) in enumerate(ranked):
            fused[doc_id] = fused.get(doc_id, 0.0) + 1.0 / (k + i + 1)
    return RankedList.from_scores(fused.items())


@dataclass
class SearchIndexes:
    """Everything retrieve() needs, built over one corpus."""

    inverted: InvertedIndex
    dense: DenseIndex
    embedder: Embedder
    bm25: Bm25Params = field(default_factory=Bm25Params)


@dataclass
class RetrievalResult:
    """Fused ranking plus the intermediate signals the ranker consumes."""

    fused: RankedList
    combined: RankedList
    bm25: RankedList
    max_cosine: dict[str, float]
    best_paragraph: dict[str, ParagraphKey]
    tfidf: dict[str, float]
    top_paragraphs: list[tuple[ParagraphKey, float]]
    query_embedding: np.ndarray


def _top_doc_ids(scores: dict[str, float], pool_size: int) -> list[str]:
    ordered = sorted(scores.items(), key=lambda e: (-e[1], e[0]))
    return [doc_id for doc_id, _ in ordered[:pool_size]]


def retrieve(query: Topic | str, cfg: FusionConfig, indexes: SearchIndexes) -> RetrievalResult:
    """Retrieve up to cfg.pool_size documents for a query.

    Stages: per-document max paragraph cosine; linear combination with
    max-normalized TF-IDF over the candidate pool (union of dense and
    TF-IDF top pools); BM25 ranking; RRF fusion of the two rankings.
    """
    text = query.query if isinstance(query, Topic) else query
    q_tokens = tokenize(text)
    q_vec = indexes.embedder.embed(text)
    null = getattr(indexes.embedder, "null_vector", None)
    signal_free = bool(np.all(q_vec == 0.0)) or (
        null is not None and np.array_equal(q_vec, null)
    )
    if not q_tokens and signal_free:
        raise EmptyQueryError("empty query")

    idx = indexes.inverted
    para_scores = indexes.dense.scores(q_vec)
    max_cosine: dict[str, float] = {}
    best_paragraph: dict[str, ParagraphKey] = {}
    for i, key in enumerate(indexes.dense.keys):
        doc_id = key[0]
        score = float(para_scores[i])
        best = max_cosine.get(doc_id)
        # Strict > keeps the lowest ordinal on ties (keys are scanned in order).
        if best is None or score > best:
            max_cosine[doc_id] = score
            best_paragraph[doc_id] = key
    para_order = sorted(
        range(len(indexes.dense.keys)),
        key=lambda i: (-para_scores[i], indexes.dense.keys[i]),
    )
    top_paragraphs = [
        (indexes.dense.keys[i], float(para_scores[i]))
        for i in para_order[: cfg.pool_size]
    ]

    tfidf_all = tfidf_scores_all(idx, q_tokens)
    tfidf: dict[str, float] = {
        doc_id: float(tfidf_all[pos]) for doc_id, pos in idx.doc_pos.items()
    }

    dense_pool = _top_doc_ids(max_cosine, cfg.pool_size)
    tfidf_positive = {d: s for d, s in tfidf.items() if s > 0.0}
    tfidf_pool = _top_doc_ids(tfidf_positive, cfg.pool_size)
    candidates = sorted(set(dense_pool) | set(tfidf_pool))

    tfidf_max = max(tfidf.values(), default=0.0)
    if cfg.normalize_tfidf and tfidf_max > 0.0:
        tfidf_for_mix = {d: s / tfidf_max for d, s in tfidf.items()}
    else:
        tfidf_for_mix = tfidf

    combined_scores = {
        d: combine_score(max_cosine.get(d, 0.0), tfidf_for_mix.get(d, 0.0), cfg.mu)
        for d in candidates
    }
    combined = RankedList.from_scores(combined_scores.items()).truncate(cfg.pool_size)

    bm25_all = bm25_scores_all(idx, indexes.bm25, q_tokens)
    bm25_positive = {
        doc_id: float(bm25_all[pos])
        for doc_id, pos in idx.doc_pos.items()
        if bm25_all[pos] > 0.0
    }
    bm25_ranked = RankedList.from_scores(bm25_positive.items()).truncate(cfg.pool_size)

    fused = rrf_fuse(combined, bm25_ranked, cfg.rrf_k).truncate(cfg.pool_size)
    return RetrievalResult(
        fused=fused,
        combined=combined,
        bm25=bm25_ranked,
        max_cosine=max_cosine,
        best_paragraph=best_paragraph,
        tfidf=tfidf,
        top_paragraphs=top_paragraphs,
        query_embedding=q_vec,
    )
