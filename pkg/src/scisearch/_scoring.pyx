# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernels over CSR posting arrays.

Semantics must stay identical to scisearch._scoring_py; both backends are
exercised by the same tests and by benchmarks/bench_scoring.py.
"""

from libc.math cimport log


def bm25_accumulate(long long[:] indptr,
                    int[:] post_docs,
                    double[:] post_tfs,
                    double[:] doc_lens,
                    double avg_len,
                    long long[:] q_tids,
                    double[:] q_weights,
                    double k1,
                    double b,
                    double[:] out):
    """Add BM25 contributions of each query term to out (indexed by doc position)."""
    cdef Py_ssize_t j, p, d
    cdef long long t
    cdef double w, tf, denom
    for j in range(q_tids.shape[0]):
        t = q_tids[j]
        w = q_weights[j]
        for p in range(indptr[t], indptr[t + 1]):
            d = post_docs[p]
            tf = post_tfs[p]
            denom = tf + k1 * (1.0 - b + b * doc_lens[d] / avg_len)
            out[d] += w * tf * (k1 + 1.0) / denom


def tfidf_accumulate(long long[:] indptr,
                     int[:] post_docs,
                     double[:] post_tfs,
                     double[:] idf,
                     long long[:] q_tids,
                     double[:] q_weights,
                     double[:] out):
    """Add query-document dot-product contributions of each query term to out."""
    cdef Py_ssize_t j, p
    cdef long long t
    cdef double w, w_idf
    for j in range(q_tids.shape[0]):
        t = q_tids[j]
        w = q_weights[j]
        w_idf = idf[t]
        for p in range(indptr[t], indptr[t + 1]):
            out[post_docs[p]] += w * (1.0 + log(post_tfs[p])) * w_idf
