"""Collapsed multinomial transcript quantification.

Relative transcript abundances theta carry a Dirichlet prior and are
marginalised; each read keeps an explicit assignment factor over the
transcripts it aligns to. Responsibilities live on the sparse alignment
support only, so states are ragged rather than dense N x M tables.
"""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..core import BoundReport, GradientPair
from ..expfam import DirichletParams, SparseLogitTable, digamma, dirichlet_kl, ln_gamma
from ..rng import make_rng, standard_normal

__all__ = [
    "AlignmentMatrix",
    "QuantPrior",
    "QuantModel",
    "quant_bound",
    "quant_gradient",
    "quant_posterior_theta",
]

INIT_SIGMA = 0.1


@dataclass(frozen=True)
class AlignmentMatrix:
    """Sparse read-to-transcript alignment log-likelihoods (CSR)."""

    n_reads: int
    n_transcripts: int
    indptr: np.ndarray
    cols: np.ndarray
    loglik: np.ndarray

    def __post_init__(self):
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        cols = np.ascontiguousarray(self.cols, dtype=np.int64)
        loglik = np.ascontiguousarray(self.loglik, dtype=np.float64)
        if indptr.ndim != 1 or indptr.shape[0] != self.n_reads + 1:
            raise ValueError("indptr must have n_reads + 1 entries")
        if indptr[0] != 0 or indptr[-1] != loglik.size:
            raise ValueError("indptr must run from 0 to the entry count")
        if np.any(np.diff(indptr) < 1):
            raise ValueError("every read needs at least one alignment")
        if cols.shape != loglik.shape or loglik.ndim != 1:
            raise ValueError("cols and loglik must be flat and equal length")
        if np.any(cols < 0) or np.any(cols >= self.n_transcripts):
            raise ValueError(f"transcript ids must lie in [0, {self.n_transcripts})")
        if not np.all(np.isfinite(loglik)):
            raise ValueError("log-likelihoods must be finite")
        for i in range(self.n_reads):
            row = cols[indptr[i] : indptr[i + 1]]
            if np.unique(row).size != row.size:
                raise ValueError(f"read {i}: duplicate transcript entries")
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "loglik", loglik)

    @classmethod
    def from_entries(cls, n_reads, n_transcripts, entries):
        """Build from (read, transcript, loglik) triples in any order.

        Entries are grouped by read with a stable sort, so ties keep
        their input order within each read.
        """
        entries = list(entries)
        reads = np.array([e[0] for e in entries], dtype=np.int64)
        if entries and (reads.min() < 0 or reads.max() >= n_reads):
            raise ValueError(f"read ids must lie in [0, {n_reads})")
        order = np.argsort(reads, kind="stable")
        counts = np.bincount(reads, minlength=n_reads) if entries else np.zeros(
            n_reads, dtype=np.int64
        )
        indptr = np.zeros(n_reads + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        cols = np.array([entries[i][1] for i in order], dtype=np.int64)
        loglik = np.array([entries[i][2] for i in order], dtype=np.float64)
        return cls(n_reads, n_transcripts, indptr, cols, loglik)

    @property
    def nnz(self):
        return self.loglik.shape[0]


@dataclass(frozen=True)
class QuantPrior:
    """Dirichlet prior over transcript abundances.

    ``alpha0`` is either a length-M vector or a symmetric scalar that
    broadcasts against the alignment matrix's transcript count.
    """

    alpha0: object = 1.0

    def __post_init__(self):
        arr = np.asarray(self.alpha0, dtype=np.float64)
        if arr.ndim > 1:
            raise ValueError("alpha0 must be a scalar or a vector")
        if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("alpha0 entries must be finite and > 0")
        object.__setattr__(
            self, "alpha0", float(arr) if arr.ndim == 0 else arr.copy()
        )

    def vector(self, n_transcripts):
        """Concentration vector of the requested length."""
        if np.ndim(self.alpha0) == 0:
            return np.full(n_transcripts, self.alpha0)
        if self.alpha0.shape[0] != n_transcripts:
            raise ValueError(
                f"prior length {self.alpha0.shape[0]} != {n_transcripts} transcripts"
            )
        return self.alpha0.copy()


class QuantModel:
    """Collapsed quantification over a fixed alignment matrix."""

    def __init__(self, alignments, prior=None):
        self.alignments = alignments
        self.prior = prior if prior is not None else QuantPrior()
        self._alpha0 = self.prior.vector(alignments.n_transcripts)
        self._alpha0_hat = float(self._alpha0.sum())
        self._ln_norm_prior = float(
            ln_gamma(self._alpha0_hat)
            - ln_gamma(self._alpha0_hat + alignments.n_reads)
            - ln_gamma(self._alpha0).sum()
        )

    @property
    def n(self):
        return self.alignments.n_reads

    def init_state(self, seed):
        rng = make_rng(seed)
        return SparseLogitTable(
            self.alignments.indptr,
            self.alignments.cols,
            INIT_SIGMA * standard_normal(rng, (self.alignments.nnz,)),
        )

    def _check_state(self, state):
        a = self.alignments
        if (
            state.rho.shape != a.loglik.shape
            or not np.array_equal(state.indptr, a.indptr)
            or not np.array_equal(state.cols, a.cols)
        ):
            raise ValueError("state support does not match the alignment matrix")

    def _phi_hat(self, state):
        return kernels.bincount_weighted(
            self.alignments.cols, state.r, self.alignments.n_transcripts
        )

    def bound(self, state):
        """Collapsed bound L_KL at the state."""
        self._check_state(state)
        phi_hat = self._phi_hat(state)
        return (
            float(state.r @ self.alignments.loglik)
            + kernels.entropy_flat(state.r)
            + self._ln_norm_prior
            + float(ln_gamma(self._alpha0 + phi_hat).sum())
        )

    def gradients(self, state):
        """Gradient pair of L_KL at the state.

        The ln Gamma(alpha0_hat + N) term is flat because the rows of
        phi sum to one, so it drops out of both components.
        """
        self._check_state(state)
        phi_hat = self._phi_hat(state)
        u = (
            self.alignments.loglik
            - np.log(state.r)
            - 1.0
            + digamma(self._alpha0 + phi_hat)[self.alignments.cols]
        )
        ordinary = kernels.segment_softmax_chain(state.r, u, state.indptr)
        return GradientPair(ordinary=ordinary, natural=u)

    def posterior_theta(self, state):
        """Implicit Dirichlet posterior over abundances at the state."""
        self._check_state(state)
        return DirichletParams(self._alpha0 + self._phi_hat(state))

    def mean_field_bound(self, state, aux):
        """Mean-field bound with the abundance factor frozen at q*(aux)."""
        self._check_state(state)
        self._check_state(aux)
        post_aux = self.posterior_theta(aux)
        e_ln_theta = digamma(post_aux.concentration) - digamma(post_aux.total)
        u = self.alignments.loglik + e_ln_theta[self.alignments.cols]
        prior = DirichletParams(self._alpha0)
        mf = (
            float(state.r @ u)
            + kernels.entropy_flat(state.r)
            - dirichlet_kl(post_aux, prior)
        )
        kl_gap = dirichlet_kl(post_aux, self.posterior_theta(state))
        return BoundReport(klc=self.bound(state), mf=mf, kl_gap=kl_gap)


def quant_bound(prior, alignments, state):
    """Collapsed bound; free-function form of QuantModel.bound."""
    return QuantModel(alignments, prior).bound(state)


def quant_gradient(prior, alignments, state):
    """Gradient pair; free-function form of QuantModel.gradients."""
    return QuantModel(alignments, prior).gradients(state)


def quant_posterior_theta(prior, state):
    """Posterior Dirichlet from a prior and a state alone.

    The transcript count is taken from a vector prior when given and
    from the state's support otherwise, so states that never touch the
    last transcripts need the vector form.
    """
    if np.ndim(prior.alpha0) == 0:
        m = int(state.cols.max()) + 1 if state.nnz else 0
    else:
        m = prior.alpha0.shape[0]
    alpha0 = prior.vector(m)
    phi_hat = kernels.bincount_weighted(state.cols, state.r, m)
    return DirichletParams(alpha0 + phi_hat)
