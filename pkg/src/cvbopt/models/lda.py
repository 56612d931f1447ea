"""Collapsed latent Dirichlet allocation.

Topic mixtures theta_d and word distributions phi_k are marginalised
against their symmetric Dirichlet priors; the per-token assignment
factors keep explicit responsibilities. Identical tokens (same document
and word type) share one optimal responsibility row, so the state holds
one row per (document, word-type) pair and every sum weights rows by
the token count. The aggregation is exact, not an approximation; the
tests pin it against a token-expanded corpus.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..core import BoundReport, GradientPair
from ..expfam import LogitTable, digamma, ln_gamma
from ..rng import make_rng, standard_normal

__all__ = [
    "Corpus",
    "LdaPriors",
    "LdaPosterior",
    "LdaModel",
    "lda_posterior",
    "lda_bound",
    "lda_gradient",
    "lda_topics",
]

INIT_SIGMA = 0.1


@dataclass(frozen=True)
class Corpus:
    """Sparse bag-of-words corpus over (doc, word, count) triples."""

    n_docs: int
    vocab_size: int
    doc_ids: np.ndarray
    word_ids: np.ndarray
    counts: np.ndarray
    vocab: tuple = None

    def __post_init__(self):
        doc_ids = np.ascontiguousarray(self.doc_ids, dtype=np.int64)
        word_ids = np.ascontiguousarray(self.word_ids, dtype=np.int64)
        counts = np.ascontiguousarray(self.counts, dtype=np.float64)
        if not (doc_ids.shape == word_ids.shape == counts.shape) or doc_ids.ndim != 1:
            raise ValueError("doc_ids, word_ids and counts must be flat and equal length")
        if doc_ids.size == 0:
            raise ValueError("corpus has no tokens")
        if np.any(counts < 1) or np.any(counts != np.round(counts)):
            raise ValueError("counts must be integers >= 1")
        if np.any(doc_ids < 0) or np.any(doc_ids >= self.n_docs):
            raise ValueError(f"doc ids must lie in [0, {self.n_docs})")
        if np.any(word_ids < 0) or np.any(word_ids >= self.vocab_size):
            raise ValueError(f"word ids must lie in [0, {self.vocab_size})")
        pairs = doc_ids * self.vocab_size + word_ids
        if np.unique(pairs).size != pairs.size:
            raise ValueError("duplicate (doc, word) pairs")
        if self.vocab is not None:
            vocab = tuple(self.vocab)
            if len(vocab) != self.vocab_size:
                raise ValueError(
                    f"vocab has {len(vocab)} entries, expected {self.vocab_size}"
                )
            object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "doc_ids", doc_ids)
        object.__setattr__(self, "word_ids", word_ids)
        object.__setattr__(self, "counts", counts)

    @property
    def n_types(self):
        """Number of (doc, word) rows, the state's row count."""
        return self.doc_ids.shape[0]

    @property
    def n_tokens(self):
        return float(self.counts.sum())

    def doc_lengths(self):
        """N_d = total token count per document."""
        return kernels.bincount_weighted(self.doc_ids, self.counts, self.n_docs)


@dataclass(frozen=True)
class LdaPriors:
    """Symmetric Dirichlet concentrations and the topic count."""

    alpha: float
    beta: float
    K: int

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError("alpha must be finite and > 0")
        if not (np.isfinite(self.beta) and self.beta > 0.0):
            raise ValueError("beta must be finite and > 0")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "K", int(self.K))


@dataclass(frozen=True)
class LdaPosterior:
    """Implicit Dirichlet posteriors over documents and topics."""

    alpha_prime: np.ndarray
    beta_prime: np.ndarray


def _ln_dirichlet_norm_rows(a):
    """ln R_D of each row of a matrix of concentrations."""
    return ln_gamma(a.sum(axis=1)) - ln_gamma(a).sum(axis=1)


def _dirichlet_kl_rows(q, p):
    """Row-wise KL(Dirichlet(q_i) || Dirichlet(p_i)), summed."""
    elog = digamma(q) - digamma(q.sum(axis=1, keepdims=True))
    return float(
        (_ln_dirichlet_norm_rows(q) - _ln_dirichlet_norm_rows(p)).sum()
        + ((q - p) * elog).sum()
    )


def lda_posterior(priors, corpus, state):
    """alpha'_dk and beta'_kv accumulated from count-weighted rows."""
    if state.rho.shape != (corpus.n_types, priors.K):
        raise ValueError(
            f"state shape {state.rho.shape} != ({corpus.n_types}, {priors.K})"
        )
    ap, bp = kernels.lda_accumulate(
        state.r,
        corpus.counts,
        corpus.doc_ids,
        corpus.word_ids,
        corpus.n_docs,
        corpus.vocab_size,
        priors.alpha,
        priors.beta,
    )
    return LdaPosterior(alpha_prime=ap, beta_prime=bp)


class LdaModel:
    """Collapsed LDA over a fixed corpus."""

    def __init__(self, corpus, priors):
        self.corpus = corpus
        self.priors = priors
        self.k = priors.K
        self._ln_norm_prior = corpus.n_docs * (
            ln_gamma(priors.K * priors.alpha) - priors.K * ln_gamma(priors.alpha)
        ) + priors.K * (
            ln_gamma(corpus.vocab_size * priors.beta)
            - corpus.vocab_size * ln_gamma(priors.beta)
        )

    @property
    def n(self):
        return self.corpus.n_types

    def init_state(self, seed):
        rng = make_rng(seed)
        return LogitTable(
            INIT_SIGMA * standard_normal(rng, (self.corpus.n_types, self.k))
        )

    def posterior(self, state):
        return lda_posterior(self.priors, self.corpus, state)

    def bound(self, state):
        """Collapsed bound L_KL at the state."""
        post = self.posterior(state)
        return self._bound_from(post, state.r)

    def _bound_from(self, post, r):
        return float(
            self._ln_norm_prior
            - _ln_dirichlet_norm_rows(post.alpha_prime).sum()
            - _ln_dirichlet_norm_rows(post.beta_prime).sum()
            + kernels.entropy_weighted_rows(r, self.corpus.counts)
        )

    def _row_expectations(self, post):
        """u[t, k] = E[ln theta_dk] + E[ln phi_kv] on each type row."""
        psi_a = digamma(post.alpha_prime)
        psi_a_sum = digamma(post.alpha_prime.sum(axis=1))
        psi_b = digamma(post.beta_prime)
        psi_b_sum = digamma(post.beta_prime.sum(axis=1))
        return (
            psi_a[self.corpus.doc_ids]
            - psi_a_sum[self.corpus.doc_ids, None]
            + psi_b[:, self.corpus.word_ids].T
            - psi_b_sum[None, :]
        )

    def gradients(self, state):
        """Gradient pair of L_KL at the state.

        The natural component is per token: the count multiplicity
        lives in the tied-row Fisher metric, so a unit natural step is
        the VB-E update. The ordinary component keeps the count factor.
        """
        post = self.posterior(state)
        u = self._row_expectations(post) - np.log(state.r) - 1.0
        ordinary = self.corpus.counts[:, None] * kernels.softmax_chain(state.r, u)
        return GradientPair(ordinary=ordinary.reshape(-1), natural=u.reshape(-1))

    def mean_field_bound(self, state, aux):
        """Mean-field bound with the collapsed factor frozen at q*(aux)."""
        post_state = self.posterior(state)
        post_aux = self.posterior(aux)
        u = self._row_expectations(post_aux)
        prior_a = np.full_like(post_aux.alpha_prime, self.priors.alpha)
        prior_b = np.full_like(post_aux.beta_prime, self.priors.beta)
        mf = (
            float((self.corpus.counts[:, None] * state.r * u).sum())
            + kernels.entropy_weighted_rows(state.r, self.corpus.counts)
            - _dirichlet_kl_rows(post_aux.alpha_prime, prior_a)
            - _dirichlet_kl_rows(post_aux.beta_prime, prior_b)
        )
        kl_gap = _dirichlet_kl_rows(
            post_aux.alpha_prime, post_state.alpha_prime
        ) + _dirichlet_kl_rows(post_aux.beta_prime, post_state.beta_prime)
        return BoundReport(
            klc=self._bound_from(post_state, state.r), mf=mf, kl_gap=kl_gap
        )


def lda_bound(priors, corpus, state):
    """Collapsed bound; free-function form of LdaModel.bound."""
    return LdaModel(corpus, priors).bound(state)


def lda_gradient(priors, corpus, state):
    """Gradient pair; free-function form of LdaModel.gradients."""
    return LdaModel(corpus, priors).gradients(state)


def lda_topics(posterior, top_n, vocab=None):
    """Per-topic word ranking by beta', ties broken by word id.

    Returns a list of lists of (word, weight) pairs; words are vocab
    strings when a vocab map is given, ids otherwise. top_n larger than
    the vocabulary truncates silently.
    """
    beta = posterior.beta_prime
    k, v = beta.shape
    n = min(int(top_n), v)
    out = []
    for j in range(k):
        order = np.lexsort((np.arange(v), -beta[j]))[:n]
        if vocab is not None:
            out.append([(vocab[i], float(beta[j, i])) for i in order])
        else:
            out.append([(int(i), float(beta[j, i])) for i in order])
    return out
