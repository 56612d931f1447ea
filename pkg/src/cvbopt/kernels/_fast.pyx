# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the hot array kernels.

Mirrors ``_pure`` function for function; see that module for the
contracts. Loops run in fixed index order so results are deterministic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log

cnp.import_array()

LOG_FLOOR = 1e-300

cdef double C_LOG_FLOOR = 1e-300


def softmax_rows(rho):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.ascontiguousarray(rho, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], k = a.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, k), dtype=np.float64)
    cdef double m, s
    for i in range(n):
        m = a[i, 0]
        for j in range(1, k):
            if a[i, j] > m:
                m = a[i, j]
        s = 0.0
        for j in range(k):
            out[i, j] = exp(a[i, j] - m)
            s += out[i, j]
        for j in range(k):
            out[i, j] /= s
    return out


def softmax_chain(r, g):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gg = np.ascontiguousarray(g, dtype=np.float64)
    if rr.shape[0] != gg.shape[0] or rr.shape[1] != gg.shape[1]:
        raise ValueError(
            f"shape mismatch: r {tuple(np.shape(r))} vs g {tuple(np.shape(g))}"
        )
    cdef Py_ssize_t n = rr.shape[0], k = rr.shape[1], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, k), dtype=np.float64)
    cdef double dot
    for i in range(n):
        dot = 0.0
        for j in range(k):
            dot += rr[i, j] * gg[i, j]
        for j in range(k):
            out[i, j] = rr[i, j] * (gg[i, j] - dot)
    return out


def entropy_dense(r):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0], k = rr.shape[1], i, j
    cdef double acc = 0.0, v
    for i in range(n):
        for j in range(k):
            v = rr[i, j]
            if v < C_LOG_FLOOR:
                v = C_LOG_FLOOR
            acc -= rr[i, j] * log(v)
    return acc


def entropy_weighted_rows(r, w):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0], k = rr.shape[1], i, j
    cdef double acc = 0.0, row, v
    for i in range(n):
        row = 0.0
        for j in range(k):
            v = rr[i, j]
            if v < C_LOG_FLOOR:
                v = C_LOG_FLOOR
            row -= rr[i, j] * log(v)
        acc += ww[i] * row
    return acc


def entropy_flat(r):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef Py_ssize_t n = rr.shape[0], i
    cdef double acc = 0.0, v
    for i in range(n):
        v = rr[i]
        if v < C_LOG_FLOOR:
            v = C_LOG_FLOOR
        acc -= rr[i] * log(v)
    return acc


def mog_suffstats(Y, r):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] yy = np.ascontiguousarray(Y, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rr = np.ascontiguousarray(r, dtype=np.float64)
    if yy.shape[0] != rr.shape[0]:
        raise ValueError(
            f"shape mismatch: Y {tuple(np.shape(Y))} vs r {tuple(np.shape(r))}"
        )
    cdef Py_ssize_t n = yy.shape[0], d = yy.shape[1], k = rr.shape[1]
    cdef Py_ssize_t i, j, a, b
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rhat = np.zeros(k, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ybar = np.zeros((k, d), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] C = np.zeros((k, d, d), dtype=np.float64)
    cdef double w
    for i in range(n):
        for j in range(k):
            w = rr[i, j]
            rhat[j] += w
            for a in range(d):
                ybar[j, a] += w * yy[i, a]
                for b in range(d):
                    C[j, a, b] += w * yy[i, a] * yy[i, b]
    return rhat, ybar, C


def segment_softmax(rho, indptr):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] a = np.ascontiguousarray(rho, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef Py_ssize_t nseg = ptr.shape[0] - 1, i, j, lo, hi
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(a.shape[0], dtype=np.float64)
    cdef double m, s
    for i in range(nseg):
        lo = ptr[i]
        hi = ptr[i + 1]
        m = a[lo]
        for j in range(lo + 1, hi):
            if a[j] > m:
                m = a[j]
        s = 0.0
        for j in range(lo, hi):
            out[j] = exp(a[j] - m)
            s += out[j]
        for j in range(lo, hi):
            out[j] /= s
    return out


def segment_softmax_chain(r, g, indptr):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gg = np.ascontiguousarray(g, dtype=np.float64)
    if rr.shape[0] != gg.shape[0]:
        raise ValueError(
            f"shape mismatch: r {tuple(np.shape(r))} vs g {tuple(np.shape(g))}"
        )
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef Py_ssize_t nseg = ptr.shape[0] - 1, i, j, lo, hi
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(rr.shape[0], dtype=np.float64)
    cdef double dot
    for i in range(nseg):
        lo = ptr[i]
        hi = ptr[i + 1]
        dot = 0.0
        for j in range(lo, hi):
            dot += rr[j] * gg[j]
        for j in range(lo, hi):
            out[j] = rr[j] * (gg[j] - dot)
    return out


def lda_accumulate(r, counts, doc_ids, word_ids, n_docs, vocab, alpha, beta):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rr = np.ascontiguousarray(r, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cc = np.ascontiguousarray(counts, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] dd = np.ascontiguousarray(doc_ids, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] vv = np.ascontiguousarray(word_ids, dtype=np.int64)
    cdef Py_ssize_t t = rr.shape[0], k = rr.shape[1], i, j
    cdef double a0 = alpha, b0 = beta, w
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ap = np.full((n_docs, k), a0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] bp = np.full((k, vocab), b0, dtype=np.float64)
    for i in range(t):
        for j in range(k):
            w = cc[i] * rr[i, j]
            ap[dd[i], j] += w
            bp[j, vv[i]] += w
    return ap, bp


def bincount_weighted(idx, w, m):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ii = np.ascontiguousarray(idx, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = ii.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m, dtype=np.float64)
    for i in range(n):
        out[ii[i]] += ww[i]
    return out
