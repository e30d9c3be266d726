"""Tokenization, inverted index, TF-IDF and BM25 scoring, dense paragraph index.

Keyword scoring comes in two forms with identical semantics: per-document
reference functions (tfidf_score, bm25_score) that are easy to audit, and
batch functions (tfidf_scores_all, bm25_scores_all) that run over CSR
posting arrays through the kernels backend for query-time use.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass

import numpy as np

from scisearch import kernels
from scisearch.corpus import Document

TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

TOKENIZER_VERSION = "unicode-alnum-v1"


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


class InvertedIndex:
    """Document-level postings with the derived statistics scoring needs.

    doc_ids are kept sorted so posting lists (doc position, tf) are sorted
    by doc_id as well. The index is immutable once built.
    """

    def __init__(self, doc_tokens: dict[str, list[str]]):
        if not doc_tokens:
            raise ValueError("empty corpus")
        self.doc_ids: list[str] = sorted(doc_tokens)
        self.doc_count: int = len(self.doc_ids)
        self.doc_pos: dict[str, int] = {d: i for i, d in enumerate(self.doc_ids)}
        self.doc_lengths: dict[str, int] = {}
        postings: dict[str, list[tuple[str, int]]] = {}
        for doc_id in self.doc_ids:
            tokens = doc_tokens[doc_id]
            self.doc_lengths[doc_id] = len(tokens)
            for term, tf in sorted(Counter(tokens).items()):
                postings.setdefault(term, []).append((doc_id, tf))
        self.postings: dict[str, list[tuple[str, int]]] = postings
        self.avg_doc_length: float = sum(self.doc_lengths.values()) / self.doc_count
        self._prepare_arrays()

    def _prepare_arrays(self) -> None:
        self.vocab: list[str] = sorted(self.postings)
        self.term_pos: dict[str, int] = {t: i for i, t in enumerate(self.vocab)}
        sizes = [len(self.postings[t]) for t in self.vocab]
        self.indptr = np.zeros(len(self.vocab) + 1, dtype=np.int64)
        np.cumsum(sizes, out=self.indptr[1:])
        nnz = int(self.indptr[-1])
        self.post_docs = np.zeros(nnz, dtype=np.int32)
        self.post_tfs = np.zeros(nnz, dtype=np.float64)
        at = 0
        for term in self.vocab:
            for doc_id, tf in self.postings[term]:
                self.post_docs[at] = self.doc_pos[doc_id]
                self.post_tfs[at] = tf
                at += 1
        self.doc_len_arr = np.array(
            [self.doc_lengths[d] for d in self.doc_ids], dtype=np.float64
        )
        self.df = np.array([len(self.postings[t]) for t in self.vocab], dtype=np.int64)
        m = self.doc_count
        self.tfidf_idf = np.log((1.0 + m) / (1.0 + self.df)) + 1.0
        self.bm25_idf = np.log(1.0 + (m - self.df + 0.5) / (self.df + 0.5))
        norms_sq = np.zeros(m, dtype=np.float64)
        for tid in range(len(self.vocab)):
            idf = self.tfidf_idf[tid]
            for p in range(self.indptr[tid], self.indptr[tid + 1]):
                w = (1.0 + math.log(self.post_tfs[p])) * idf
                norms_sq[self.post_docs[p]] += w * w
        self.tfidf_doc_norms = np.sqrt(norms_sq)

    def term_frequency(self, term: str, doc_id: str) -> int:
        posting = self.postings.get(term)
        if not posting:
            return 0
        i = bisect_left(posting, (doc_id,))
        if i < len(posting) and posting[i][0] == doc_id:
            return posting[i][1]
        return 0

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def _require_doc(self, doc_id: str) -> int:
        if doc_id not in self.doc_pos:
            raise KeyError(f"unknown doc_id: {doc_id!r}")
        return self.doc_pos[doc_id]


def build_inverted_index(corpus: list[Document]) -> InvertedIndex:
    """Index full document text: title + abstract + body + captions."""
    if not corpus:
        raise ValueError("empty corpus")
    return InvertedIndex({doc.id: tokenize(doc.full_text()) for doc in corpus})


def _tfidf_query_weights(idx: InvertedIndex, query: list[str]) -> dict[str, float]:
    """tf-idf weights of query terms restricted to the index vocabulary."""
    weights = {}
    for term, qtf in Counter(query).items():
        tid = idx.term_pos.get(term)
        if tid is None:
            continue
        weights[term] = (1.0 + math.log(qtf)) * idx.tfidf_idf[tid]
    return weights


def tfidf_score(idx: InvertedIndex, query: list[str], doc_id: str) -> float:
    """Cosine similarity of query and document tf-idf vectors, in [0, 1].

    tf weight = 1 + ln(tf); idf = ln((1+M)/(1+df)) + 1. Out-of-vocabulary
    query terms are dropped (the document side is zero for them anyway).
    """
    pos = idx._require_doc(doc_id)
    weights = _tfidf_query_weights(idx, query)
    if not weights:
        return 0.0
    dot = 0.0
    for term, qw in weights.items():
        tf = idx.term_frequency(term, doc_id)
        if tf:
            tid = idx.term_pos[term]
            dot += qw * (1.0 + math.log(tf)) * idx.tfidf_idf[tid]
    if dot == 0.0:
        return 0.0
    q_norm = math.sqrt(sum(w * w for w in weights.values()))
    return dot / (q_norm * idx.tfidf_doc_norms[pos])


def bm25_score(idx: InvertedIndex, params: Bm25Params, query: list[str], doc_id: str) -> float:
    """BM25 with bag semantics over query terms; non-negative.

    idf(t) = ln(1 + (M - df + 0.5)/(df + 0.5)).
    """
    pos = idx._require_doc(doc_id)
    doc_len = idx.doc_len_arr[pos]
    score = 0.0
    for term, qtf in Counter(query).items():
        tid = idx.term_pos.get(term)
        if tid is None:
            continue
        tf = idx.term_frequency(term, doc_id)
        if not tf:
            continue
        denom = tf + params.k1 * (1.0 - params.b + params.b * doc_len / idx.avg_doc_length)
        score += qtf * idx.bm25_idf[tid] * tf * (params.k1 + 1.0) / denom
    return score


def _query_term_arrays(idx: InvertedIndex, query: list[str]) -> tuple[np.ndarray, np.ndarray]:
    tids: list[int] = []
    qtfs: list[float] = []
    for term, qtf in sorted(Counter(query).items()):
        tid = idx.term_pos.get(term)
        if tid is not None:
            tids.append(tid)
            qtfs.append(float(qtf))
    return np.array(tids, dtype=np.int64), np.array(qtfs, dtype=np.float64)


def tfidf_scores_all(idx: InvertedIndex, query: list[str]) -> np.ndarray:
    """tfidf_score against every document, aligned with idx.doc_ids."""
    out = np.zeros(idx.doc_count, dtype=np.float64)
    tids, qtfs = _query_term_arrays(idx, query)
    if len(tids) == 0:
        return out
    q_weights = (1.0 + np.log(qtfs)) * idx.tfidf_idf[tids]
    kernels.tfidf_accumulate(
        idx.indptr, idx.post_docs, idx.post_tfs, idx.tfidf_idf, tids, q_weights, out
    )
    q_norm = math.sqrt(float(np.dot(q_weights, q_weights)))
    denom = q_norm * idx.tfidf_doc_norms
    np.divide(out, denom, out=out, where=denom > 0)
    return out


def bm25_scores_all(idx: InvertedIndex, params: Bm25Params, query: list[str]) -> np.ndarray:
    """bm25_score against every document, aligned with idx.doc_ids."""
    out = np.zeros(idx.doc_count, dtype=np.float64)
    tids, qtfs = _query_term_arrays(idx, query)
    if len(tids) == 0:
        return out
    q_weights = qtfs * idx.bm25_idf[tids]
    kernels.bm25_accumulate(
        idx.indptr, idx.post_docs, idx.post_tfs, idx.doc_len_arr, idx.avg_doc_length,
        tids, q_weights, params.k1, params.b, out,
    )
    return out


ParagraphKey = tuple[str, int]


class DenseIndex:
    """Exact nearest-neighbor index over unit-norm paragraph embeddings."""

    def __init__(self, entries: list[tuple[ParagraphKey, np.ndarray]], dim: int):
        self.dim = dim
        self.keys: list[ParagraphKey] = [key for key, _ in entries]
        if len(set(self.keys)) != len(self.keys):
            raise ValueError("duplicate paragraph keys in dense index")
        for key, vec in entries:
            if vec.shape != (dim,):
                raise ValueError(f"vector for {key} has shape {vec.shape}, expected ({dim},)")
        if entries:
            self.matrix = np.stack([vec for _, vec in entries]).astype(np.float64)
        else:
            self.matrix = np.zeros((0, dim), dtype=np.float64)

    def __len__(self) -> int:
        return len(self.keys)

    def scores(self, q: np.ndarray) -> np.ndarray:
        """Cosine of q against every entry (vectors are unit-norm)."""
        if q.shape != (self.dim,):
            raise ValueError(f"query vector has shape {q.shape}, expected ({self.dim},)")
        return self.matrix @ q


def nn_search(dense: DenseIndex, q: np.ndarray, top_k: int) -> list[tuple[ParagraphKey, float]]:
    """Exhaustive top-k by descending cosine, ties by ascending key."""
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    if len(dense) == 0:
        return []
    scores = dense.scores(q)
    order = sorted(range(len(dense)), key=lambda i: (-scores[i], dense.keys[i]))
    return [(dense.keys[i], float(scores[i])) for i in order[:top_k]]
