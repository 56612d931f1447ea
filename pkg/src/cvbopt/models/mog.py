"""Collapsed Bayesian mixture of Gaussians.

The mixing proportions pi and the component means/precisions (mu_k,
Lambda_k) are marginalised against their conjugate Dirichlet and
Gauss-Wishart priors; only the assignment responsibilities r keep an
explicit variational factor. The bound, its gradient and the implicit
posterior are all closed-form in the responsibility-weighted
sufficient statistics.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..core import BoundReport, GradientPair
from ..expfam import (
    DirichletParams,
    GaussWishartParams,
    LogitTable,
    digamma,
    dirichlet_kl,
    gauss_wishart_expect_ln_det,
    gauss_wishart_kl,
    ln_dirichlet_norm,
    ln_gauss_wishart_norm,
)
from ..rng import make_rng, standard_normal

__all__ = [
    "MogData",
    "MogPriors",
    "MogPosterior",
    "MogModel",
    "mog_stats",
    "mog_posterior",
    "mog_bound",
    "mog_gradient",
    "default_mog_priors",
]

LN_2PI = np.log(2.0 * np.pi)

INIT_SIGMA = 0.1  # stddev of the logit noise around the uniform start


@dataclass(frozen=True)
class MogData:
    """Observation matrix, one row per data point."""

    Y: np.ndarray

    def __post_init__(self):
        Y = np.ascontiguousarray(self.Y, dtype=np.float64)
        if Y.ndim != 2 or Y.shape[0] < 1 or Y.shape[1] < 1:
            raise ValueError("Y must be an N x Ddim matrix with N, Ddim >= 1")
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y entries must be finite")
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def dim(self):
        return self.Y.shape[1]


@dataclass(frozen=True)
class MogPriors:
    """Symmetric Dirichlet concentration plus the Gauss-Wishart prior."""

    alpha: float
    gw0: GaussWishartParams
    K: int

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0.0):
            raise ValueError("alpha must be finite and > 0")
        if self.K < 1:
            raise ValueError("K must be >= 1")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "K", int(self.K))


@dataclass(frozen=True)
class MogPosterior:
    """Implicit posterior blocks and the statistics that define them."""

    alpha: DirichletParams
    components: tuple
    rhat: np.ndarray
    ybar: np.ndarray
    C: np.ndarray
    _chols: tuple = field(repr=False, compare=False)


def default_mog_priors(data, K):
    """Weak, scale-aware priors for a dataset.

    alpha = 1e-3 (near-uninformative mixing proportions), m0 = data
    mean, kappa0 = 1e-2, nu0 = Ddim, S0 = Ddim * diag(per-dimension
    variance). All values are echoed in CLI output.
    """
    d = data.dim
    m0 = data.Y.mean(axis=0)
    var = data.Y.var(axis=0)
    S0 = d * np.diag(np.maximum(var, 1e-12))
    gw0 = GaussWishartParams(m=m0, kappa=1e-2, nu=float(d), S=S0)
    return MogPriors(alpha=1e-3, gw0=gw0, K=K)


def mog_stats(data, r):
    """Responsibility-weighted statistics (rhat_k, ybar_k, C_k)."""
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 2 or r.shape[0] != data.n:
        raise ValueError(
            f"r must be N x K with N = {data.n}, got {r.shape}"
        )
    return kernels.mog_suffstats(data.Y, r)


def mog_posterior(priors, stats):
    """Implicit Dirichlet + Gauss-Wishart posterior from statistics.

    alpha_k = alpha + rhat_k, kappa_k = kappa0 + rhat_k,
    m_k = (kappa0 m0 + ybar_k) / kappa_k, nu_k = nu0 + rhat_k,
    S_k = S0 + C_k + kappa0 m0 m0^T - kappa_k m_k m_k^T.

    Raises
    ------
    numpy.linalg.LinAlgError
        If any S_k loses positive definiteness, naming the component.
    """
    rhat, ybar, C = stats
    gw0 = priors.gw0
    k = priors.K
    if rhat.shape != (k,):
        raise ValueError(f"stats are for {rhat.shape[0]} components, K = {k}")
    alpha = DirichletParams(priors.alpha + rhat)
    m0_outer = gw0.kappa * np.outer(gw0.m, gw0.m)
    components = []
    chols = []
    for j in range(k):
        kappa_j = gw0.kappa + rhat[j]
        nu_j = gw0.nu + rhat[j]
        m_j = (gw0.kappa * gw0.m + ybar[j]) / kappa_j
        S_j = gw0.S + C[j] + m0_outer - kappa_j * np.outer(m_j, m_j)
        S_j = 0.5 * (S_j + S_j.T)
        try:
            chols.append(np.linalg.cholesky(S_j))
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(
                f"component {j}: S_k lost positive definiteness "
                f"(rhat = {rhat[j]:.3e})"
            ) from None
        components.append(
            GaussWishartParams(m=m_j, kappa=kappa_j, nu=nu_j, S=S_j)
        )
    return MogPosterior(
        alpha=alpha,
        components=tuple(components),
        rhat=rhat,
        ybar=ybar,
        C=C,
        _chols=tuple(chols),
    )


class MogModel:
    """Collapsed mixture of Gaussians over a fixed dataset."""

    def __init__(self, data, priors):
        if not isinstance(data, MogData):
            data = MogData(data)
        self.data = data
        self.priors = priors
        self.n = data.n
        self.dim = data.dim
        self.k = priors.K
        self._prior_dir = DirichletParams(np.full(priors.K, priors.alpha))
        self._ln_norm_prior = (
            ln_dirichlet_norm(self._prior_dir)
            + priors.K * ln_gauss_wishart_norm(priors.gw0)
        )
        self._const = -0.5 * self.n * self.dim * LN_2PI

    # -- state plumbing ----------------------------------------------------

    def init_state(self, seed):
        """Seeded near-uniform start; exact symmetry is a saddle."""
        rng = make_rng(seed)
        return LogitTable(INIT_SIGMA * standard_normal(rng, (self.n, self.k)))

    def _check_state(self, state):
        if state.rho.shape != (self.n, self.k):
            raise ValueError(
                f"state shape {state.rho.shape} != ({self.n}, {self.k})"
            )

    def posterior(self, state):
        """Implicit posterior at the state's responsibilities."""
        self._check_state(state)
        return mog_posterior(self.priors, mog_stats(self.data, state.r))

    # -- bound and gradients -------------------------------------------------

    def bound(self, state):
        """Collapsed bound L_KL at the state."""
        self._check_state(state)
        post = self.posterior(state)
        return self._bound_from(post, state.r)

    def _bound_from(self, post, r):
        ln_norm_post = ln_dirichlet_norm(post.alpha) + sum(
            ln_gauss_wishart_norm(c) for c in post.components
        )
        return (
            self._const
            + self._ln_norm_prior
            - ln_norm_post
            + kernels.entropy_dense(r)
        )

    def _quadratic_forms(self, post):
        """Q[n, k] = (y_n - m_k)^T S_k^{-1} (y_n - m_k) via Cholesky."""
        Y = self.data.Y
        Q = np.empty((self.n, self.k))
        for j, (c, L) in enumerate(zip(post.components, post._chols)):
            sol = np.linalg.solve(L, (Y - c.m).T)
            Q[:, j] = (sol * sol).sum(axis=0)
        return Q

    def _natural_gradient(self, post, r):
        """dL/dr_nk, omitting row constants (the softmax gauge kills them)."""
        Q = self._quadratic_forms(post)
        kappa = np.array([c.kappa for c in post.components])
        nu = np.array([c.nu for c in post.components])
        ln_det = np.array(
            [2.0 * np.log(np.diag(L)).sum() for L in post._chols]
        )
        dd = np.arange(1, self.dim + 1, dtype=np.float64)
        psi_sum = np.array(
            [digamma(0.5 * (c.nu + 1.0 - dd)).sum() for c in post.components]
        )
        return (
            -0.5 * self.dim / kappa
            - 0.5 * ln_det
            + digamma(post.alpha.concentration)
            + 0.5 * psi_sum
            - 0.5 * nu * Q
            - np.log(r)
            - 1.0
        )

    def gradients(self, state):
        """Gradient pair of L_KL at the state."""
        self._check_state(state)
        post = self.posterior(state)
        natural = self._natural_gradient(post, state.r)
        ordinary = kernels.softmax_chain(state.r, natural)
        return GradientPair(ordinary=ordinary.reshape(-1), natural=natural.reshape(-1))

    # -- mean-field comparison ---------------------------------------------

    def _expected_log_lik(self, post):
        """u[n, k] = E[ln pi_k] + E[ln N(y_n | mu_k, Lambda_k^{-1})]."""
        Q = self._quadratic_forms(post)
        alpha = post.alpha.concentration
        e_ln_pi = digamma(alpha) - digamma(alpha.sum())
        kappa = np.array([c.kappa for c in post.components])
        nu = np.array([c.nu for c in post.components])
        e_ln_det = np.array(
            [gauss_wishart_expect_ln_det(c) for c in post.components]
        )
        return (
            e_ln_pi
            + 0.5 * e_ln_det
            - 0.5 * self.dim * LN_2PI
            - 0.5 * (self.dim / kappa + nu * Q)
        )

    def mean_field_bound(self, state, aux):
        """Mean-field bound with the collapsed factor frozen at q*(aux)."""
        self._check_state(state)
        self._check_state(aux)
        post_state = self.posterior(state)
        post_aux = self.posterior(aux)
        u = self._expected_log_lik(post_aux)
        mf = (
            float((state.r * u).sum())
            + kernels.entropy_dense(state.r)
            - dirichlet_kl(post_aux.alpha, self._prior_dir)
            - sum(
                gauss_wishart_kl(c, self.priors.gw0)
                for c in post_aux.components
            )
        )
        kl_gap = dirichlet_kl(post_aux.alpha, post_state.alpha) + sum(
            gauss_wishart_kl(ca, cs)
            for ca, cs in zip(post_aux.components, post_state.components)
        )
        return BoundReport(
            klc=self._bound_from(post_state, state.r), mf=mf, kl_gap=kl_gap
        )


def mog_bound(priors, data, state):
    """Collapsed bound; free-function form of MogModel.bound."""
    return MogModel(data, priors).bound(state)


def mog_gradient(priors, data, state):
    """Gradient pair; free-function form of MogModel.gradients."""
    return MogModel(data, priors).gradients(state)
