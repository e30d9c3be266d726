"""Benchmark the scoring kernels: compiled extension vs pure Python.

Builds a random corpus, runs the BM25 and TF-IDF accumulators from every
available backend over the same queries, checks the outputs agree, and
prints per-query timings.

Usage: python benchmarks/bench_scoring.py [--docs 2000] [--queries 50]
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from scisearch.index import Bm25Params, InvertedIndex, _query_term_arrays
from scisearch.kernels import available_backends


def make_corpus(n_docs: int, vocab_size: int, rng: random.Random) -> dict[str, list[str]]:
    vocab = [f"term{i:05d}" for i in range(vocab_size)]
    return {
        f"doc{i:05d}": rng.choices(vocab, k=rng.randint(40, 300))
        for i in range(n_docs)
    }


def make_queries(n: int, vocab_size: int, terms: int, rng: random.Random) -> list[list[str]]:
    vocab = [f"term{i:05d}" for i in range(vocab_size)]
    return [rng.sample(vocab, terms) for _ in range(n)]


def run_bm25(impl, idx: InvertedIndex, params: Bm25Params, queries: list[list[str]]) -> tuple[float, list[np.ndarray]]:
    outputs = []
    started = time.perf_counter()
    for query in queries:
        out = np.zeros(idx.doc_count, dtype=np.float64)
        tids, qtfs = _query_term_arrays(idx, query)
        if len(tids):
            q_weights = qtfs * idx.bm25_idf[tids]
            impl.bm25_accumulate(
                idx.indptr, idx.post_docs, idx.post_tfs, idx.doc_len_arr,
                idx.avg_doc_length, tids, q_weights, params.k1, params.b, out,
            )
        outputs.append(out)
    return time.perf_counter() - started, outputs


def run_tfidf(impl, idx: InvertedIndex, queries: list[list[str]]) -> tuple[float, list[np.ndarray]]:
    outputs = []
    started = time.perf_counter()
    for query in queries:
        out = np.zeros(idx.doc_count, dtype=np.float64)
        tids, qtfs = _query_term_arrays(idx, query)
        if len(tids):
            q_weights = (1.0 + np.log(qtfs)) * idx.tfidf_idf[tids]
            impl.tfidf_accumulate(
                idx.indptr, idx.post_docs, idx.post_tfs, idx.tfidf_idf,
                tids, q_weights, out,
            )
        outputs.append(out)
    return time.perf_counter() - started, outputs


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--vocab", type=int, default=5000)
    parser.add_argument("--queries", type=int, default=50)
    parser.add_argument("--terms", type=int, default=6, help="terms per query")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)

    rng = random.Random(args.seed)
    corpus = make_corpus(args.docs, args.vocab, rng)
    queries = make_queries(args.queries, args.vocab, args.terms, rng)
    idx = InvertedIndex(corpus)
    params = Bm25Params()
    backends = available_backends()

    print(
        f"corpus: {args.docs} docs, vocab {args.vocab}, "
        f"{args.queries} queries x {args.repeats} repeats, "
        f"{len(idx.post_docs)} postings"
    )
    print(f"backends: {', '.join(backends)}")
    print()

    timings: dict[str, dict[str, float]] = {}
    outputs: dict[str, dict[str, list[np.ndarray]]] = {}
    for name, impl in backends.items():
        best_bm25 = min(
            run_bm25(impl, idx, params, queries)[0] for _ in range(args.repeats)
        )
        best_tfidf = min(
            run_tfidf(impl, idx, queries)[0] for _ in range(args.repeats)
        )
        timings[name] = {"bm25": best_bm25, "tfidf": best_tfidf}
        outputs[name] = {
            "bm25": run_bm25(impl, idx, params, queries)[1],
            "tfidf": run_tfidf(impl, idx, queries)[1],
        }

    header = f"{'backend':<10}{'bm25 ms/query':>16}{'tfidf ms/query':>16}"
    print(header)
    for name, t in timings.items():
        per_bm25 = 1000.0 * t["bm25"] / args.queries
        per_tfidf = 1000.0 * t["tfidf"] / args.queries
        print(f"{name:<10}{per_bm25:>16.4f}{per_tfidf:>16.4f}")

    if "cython" in timings and "python" in timings:
        for kind in ("bm25", "tfidf"):
            speedup = timings["python"][kind] / timings["cython"][kind]
            worst = max(
                float(np.max(np.abs(a - b)))
                for a, b in zip(outputs["cython"][kind], outputs["python"][kind])
            )
            print(f"{kind}: cython is {speedup:.1f}x faster, max |difference| = {worst:.3e}")
            if worst > 1e-9:
                print(f"warning: {kind} backends disagree beyond 1e-9")
                return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
