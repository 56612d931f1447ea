"""Pure-numpy implementations of the hot array kernels.

Every function here has a compiled twin in ``_fast`` (Cython); the two are
interchangeable and are selected at import time by :mod:`cvbopt.kernels`.
All reductions run in a fixed order, so results are bit-stable across
backends up to the usual non-associativity of float summation within one
backend.
"""

import numpy as np

LOG_FLOOR = 1e-300  # responsibilities are clamped here before ln


def softmax_rows(rho):
    """Row-wise softmax with per-row max subtraction.

    Parameters
    ----------
    rho : (N, K) ndarray
        Unconstrained logits.

    Returns
    -------
    (N, K) ndarray of responsibilities; each row sums to 1.
    """
    rho = np.asarray(rho, dtype=np.float64)
    shifted = rho - rho.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_chain(r, g):
    """Chain rule through the row softmax: map dL/dr to dL/drho.

    out[n, k] = r[n, k] * (g[n, k] - sum_j r[n, j] g[n, j]); each output
    row sums to zero (the per-row gauge direction is the null space).
    """
    if r.shape != g.shape:
        raise ValueError(f"shape mismatch: r {r.shape} vs g {g.shape}")
    dot = (r * g).sum(axis=1, keepdims=True)
    return r * (g - dot)


def entropy_dense(r):
    """-sum r*ln(r) over a dense responsibility matrix, 0*ln(0) == 0."""
    return float(-(r * np.log(np.maximum(r, LOG_FLOOR))).sum())


def entropy_weighted_rows(r, w):
    """-sum_n w[n] * sum_k r[n,k] ln r[n,k] (row-weighted entropy)."""
    rows = -(r * np.log(np.maximum(r, LOG_FLOOR))).sum(axis=1)
    return float(rows @ w)


def entropy_flat(r):
    """-sum r*ln(r) over a flat responsibility array."""
    return float(-(r * np.log(np.maximum(r, LOG_FLOOR))).sum())


def mog_suffstats(Y, r):
    """Responsibility-weighted counts, sums and scatter matrices.

    Returns
    -------
    rhat : (K,) ndarray, sum_n r[n, k]
    ybar : (K, D) ndarray, sum_n r[n, k] y_n
    C : (K, D, D) ndarray, sum_n r[n, k] y_n y_n^T
    """
    if Y.shape[0] != r.shape[0]:
        raise ValueError(f"shape mismatch: Y {Y.shape} vs r {r.shape}")
    rhat = r.sum(axis=0)
    ybar = r.T @ Y
    C = np.einsum("nk,nd,ne->kde", r, Y, Y, optimize=True)
    return rhat, ybar, C


def segment_softmax(rho, indptr):
    """Softmax within each segment of a ragged flat array.

    ``indptr`` is CSR-style: segment i spans rho[indptr[i]:indptr[i+1]].
    Segments must be non-empty.
    """
    lengths = np.diff(indptr)
    m = np.maximum.reduceat(rho, indptr[:-1])
    e = np.exp(rho - np.repeat(m, lengths))
    s = np.add.reduceat(e, indptr[:-1])
    return e / np.repeat(s, lengths)


def segment_softmax_chain(r, g, indptr):
    """Per-segment analogue of :func:`softmax_chain` on flat arrays."""
    if r.shape != g.shape:
        raise ValueError(f"shape mismatch: r {r.shape} vs g {g.shape}")
    lengths = np.diff(indptr)
    dots = np.add.reduceat(r * g, indptr[:-1])
    return r * (g - np.repeat(dots, lengths))


def lda_accumulate(r, counts, doc_ids, word_ids, n_docs, vocab, alpha, beta):
    """Accumulate Dirichlet posterior parameters from type-level rows.

    alpha_prime[d, k] = alpha + sum over rows of doc d of counts * r
    beta_prime[k, v] = beta + sum over rows of word v of counts * r
    """
    k = r.shape[1]
    weighted = counts[:, None] * r
    alpha_prime = np.full((n_docs, k), alpha, dtype=np.float64)
    np.add.at(alpha_prime, doc_ids, weighted)
    beta_prime_t = np.full((vocab, k), beta, dtype=np.float64)
    np.add.at(beta_prime_t, word_ids, weighted)
    return alpha_prime, np.ascontiguousarray(beta_prime_t.T)


def bincount_weighted(idx, w, m):
    """sum of w grouped by idx, over bins 0..m-1 (fixed reduction order)."""
    return np.bincount(idx, weights=w, minlength=m)
