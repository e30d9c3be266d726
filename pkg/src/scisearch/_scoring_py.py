"""Pure-Python scoring kernels, semantically identical to scisearch._scoring.

Used when the compiled extension is unavailable or disabled via the
SCISEARCH_PURE environment variable.
"""

from __future__ import annotations

import math


def bm25_accumulate(indptr, post_docs, post_tfs, doc_lens, avg_len,
                    q_tids, q_weights, k1, b, out):
    """Add BM25 contributions of each query term to out (indexed by doc position)."""
    indptr = indptr.tolist()
    docs = post_docs.tolist()
    tfs = post_tfs.tolist()
    lens = doc_lens.tolist()
    for t, w in zip(q_tids.tolist(), q_weights.tolist()):
        for p in range(indptr[t], indptr[t + 1]):
            d = docs[p]
            tf = tfs[p]
            denom = tf + k1 * (1.0 - b + b * lens[d] / avg_len)
            out[d] += w * tf * (k1 + 1.0) / denom


def tfidf_accumulate(indptr, post_docs, post_tfs, idf, q_tids, q_weights, out):
    """Add query-document dot-product contributions of each query term to out."""
    indptr = indptr.tolist()
    docs = post_docs.tolist()
    tfs = post_tfs.tolist()
    idf = idf.tolist()
    for t, w in zip(q_tids.tolist(), q_weights.tolist()):
        w_idf = idf[t]
        for p in range(indptr[t], indptr[t + 1]):
            out[docs[p]] += w * (1.0 + math.log(tfs[p])) * w_idf
