"""Tests for the exponential-family primitives.

Reference values marked as frozen were computed with mpmath at 50
decimal digits; statistical checks use scipy as an independent
implementation.
"""

import numpy as np
import pytest
import scipy.special as sp
from numpy.testing import assert_allclose
from scipy.stats import wishart

from cvbopt import expfam as ef


def rel_err(got, true):
    true = np.asarray(true, dtype=np.float64)
    return np.abs(got - true) / np.maximum(1.0, np.abs(true))


class TestLnGamma:
    def test_known_values(self):
        assert abs(ef.ln_gamma(1.0)) < 1e-12
        assert abs(ef.ln_gamma(2.0)) < 1e-12
        assert_allclose(ef.ln_gamma(0.5), 0.5723649429247001, rtol=1e-12)

    def test_frozen_high_precision(self):
        # mpmath loggamma, 50 digits
        points = {
            0.001: 6.907178885383853682512,
            0.37: 0.8769468194848792899249,
            1.5: -0.1207822376352452223455,
            5.5: 3.957813967618716293877,
            123.456: 469.6055471299294687301,
            1e8: 1742068066.103834709276,
        }
        for x, want in points.items():
            assert rel_err(ef.ln_gamma(x), want) < 1e-12

    def test_accuracy_sweep_vs_scipy(self):
        xs = np.concatenate(
            [np.logspace(-3, 8, 500), np.linspace(0.011, 60.0, 500)]
        )
        err = rel_err(ef.ln_gamma(xs), sp.gammaln(xs))
        assert err.max() < 1e-12

    def test_recurrence(self):
        rng = np.random.default_rng(7)
        x = rng.uniform(0.1, 100.0, size=100)
        lhs = ef.ln_gamma(x + 1.0) - ef.ln_gamma(x) - np.log(x)
        assert np.abs(lhs).max() < 1e-10

    def test_vectorized_matches_scalar(self):
        xs = np.array([0.25, 1.0, 3.7, 42.0])
        vec = ef.ln_gamma(xs)
        for i, x in enumerate(xs):
            assert vec[i] == ef.ln_gamma(float(x))

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            ef.ln_gamma(bad)
        with pytest.raises(ValueError):
            ef.ln_gamma(np.array([1.0, bad]))


class TestDigamma:
    def test_known_values(self):
        assert_allclose(ef.digamma(1.0), -0.5772156649015329, rtol=1e-12)
        # psi(1/2) = -gamma - 2 ln 2
        assert_allclose(ef.digamma(0.5), -1.9635100260214235, rtol=1e-12)

    def test_frozen_high_precision(self):
        # mpmath digamma, 50 digits
        points = {
            0.001: -1000.575571931810300471,
            0.37: -2.795301410890563961628,
            1.5: 0.03648997397857652055902,
            5.5: 1.611093148581751123734,
            123.456: 4.811829323828985387322,
            1e8: 18.42068073895236546381,
        }
        for x, want in points.items():
            assert rel_err(ef.digamma(x), want) < 1e-12

    def test_accuracy_sweep_vs_scipy(self):
        xs = np.concatenate(
            [np.logspace(-3, 8, 500), np.linspace(0.011, 60.0, 500)]
        )
        err = rel_err(ef.digamma(xs), sp.digamma(xs))
        assert err.max() < 1e-12

    def test_recurrence(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(0.1, 100.0, size=100)
        lhs = ef.digamma(x + 1.0) - ef.digamma(x) - 1.0 / x
        assert np.abs(lhs).max() < 1e-10

    @pytest.mark.parametrize("bad", [0.0, -2.5, np.nan, np.inf])
    def test_domain_errors(self, bad):
        with pytest.raises(ValueError):
            ef.digamma(bad)


class TestDirichletNorm:
    def test_examples(self):
        assert abs(ef.ln_dirichlet_norm(ef.DirichletParams([1.0, 1.0]))) < 1e-14
        assert_allclose(
            ef.ln_dirichlet_norm(ef.DirichletParams([2.0, 2.0])),
            np.log(6.0),
            rtol=1e-12,
        )
        assert_allclose(
            ef.ln_dirichlet_norm(ef.DirichletParams([0.5, 0.5])),
            -np.log(np.pi),
            rtol=1e-12,
        )

    def test_symmetric_form(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            k = int(rng.integers(2, 9))
            a = float(rng.uniform(0.05, 10.0))
            got = ef.ln_dirichlet_norm(ef.DirichletParams(np.full(k, a)))
            want = ef.ln_gamma(k * a) - k * ef.ln_gamma(a)
            assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_invalid_concentration(self):
        with pytest.raises(ValueError):
            ef.DirichletParams([1.0, 0.0])
        with pytest.raises(ValueError):
            ef.DirichletParams([1.0, -3.0])
        with pytest.raises(ValueError):
            ef.DirichletParams([1.0, np.nan])


class TestGaussWishartNorm:
    def test_analytic_case(self):
        p = ef.GaussWishartParams(m=[0.0], kappa=1.0, nu=1.0, S=[[1.0]])
        assert_allclose(
            ef.ln_gauss_wishart_norm(p), -np.log(2.0) - np.log(np.pi), rtol=1e-12
        )

    def test_frozen_values(self):
        # mpmath term-by-term evaluation, 50 digits
        p1 = ef.GaussWishartParams(m=[0.0], kappa=1.0, nu=3.0, S=[[2.0]])
        assert_allclose(
            ef.ln_gauss_wishart_norm(p1), -0.79815629556942752, rtol=1e-12
        )
        p2 = ef.GaussWishartParams(m=[0.0, 0.0], kappa=2.0, nu=3.0, S=np.eye(2))
        assert_allclose(
            ef.ln_gauss_wishart_norm(p2), -3.6757541328186910, rtol=1e-12
        )

    def test_non_spd_raises(self):
        p = ef.GaussWishartParams(
            m=[0.0, 0.0], kappa=1.0, nu=3.0, S=[[1.0, 2.0], [2.0, 1.0]]
        )
        with pytest.raises(np.linalg.LinAlgError):
            ef.ln_gauss_wishart_norm(p)

    def test_param_invariants(self):
        with pytest.raises(ValueError):
            ef.GaussWishartParams(m=[0.0], kappa=0.0, nu=2.0, S=[[1.0]])
        with pytest.raises(ValueError):
            ef.GaussWishartParams(m=[0.0, 0.0], kappa=1.0, nu=0.5, S=np.eye(2))
        with pytest.raises(ValueError):
            ef.GaussWishartParams(
                m=[0.0, 0.0], kappa=1.0, nu=3.0, S=[[1.0, 0.5], [0.1, 1.0]]
            )
        with pytest.raises(ValueError):
            ef.GaussWishartParams(m=[0.0, 0.0], kappa=1.0, nu=3.0, S=np.eye(3))


class TestSoftmax:
    def test_examples(self):
        assert_allclose(
            ef.softmax_rows(np.array([[0.0, 0.0]])), [[0.5, 0.5]], rtol=1e-14
        )
        assert_allclose(
            ef.softmax_rows(np.array([[np.log(2.0), 0.0]])),
            [[2.0 / 3.0, 1.0 / 3.0]],
            rtol=1e-14,
        )
        assert_allclose(
            ef.softmax_rows(np.full((1, 3), -7.3)), np.full((1, 3), 1.0 / 3.0)
        )

    def test_shift_invariance_and_row_sums(self):
        rng = np.random.default_rng(5)
        rho = rng.normal(size=(40, 6)) * 3.0
        r = ef.softmax_rows(rho)
        assert_allclose(r.sum(axis=1), 1.0, atol=1e-12)
        shifted = ef.softmax_rows(rho + rng.normal(size=(40, 1)) * 10.0)
        assert_allclose(shifted, r, atol=1e-12)

    def test_extreme_logits_no_overflow(self):
        r = ef.softmax_rows(np.array([[900.0, 0.0, -900.0]]))
        assert np.all(np.isfinite(r))
        assert_allclose(r.sum(), 1.0, atol=1e-12)

    def test_chain_examples(self):
        r = np.array([[0.5, 0.5]])
        assert_allclose(
            ef.softmax_chain(r, np.array([[1.0, 0.0]])), [[0.25, -0.25]]
        )
        # constant rows of g are the null space
        g = np.full((3, 4), 2.7)
        r = ef.softmax_rows(np.random.default_rng(0).normal(size=(3, 4)))
        assert_allclose(ef.softmax_chain(r, g), 0.0, atol=1e-14)

    def test_chain_rows_sum_to_zero(self):
        rng = np.random.default_rng(9)
        r = ef.softmax_rows(rng.normal(size=(30, 5)))
        g = rng.normal(size=(30, 5))
        out = ef.softmax_chain(r, g)
        assert np.abs(out.sum(axis=1)).max() < 1e-10

    def test_chain_matches_finite_differences(self):
        # L(r) = sum a*r + 0.5 sum r^2 so dL/dr = a + r
        rng = np.random.default_rng(13)
        rho = rng.normal(size=(4, 3))
        a = rng.normal(size=(4, 3))

        def loss(rho_flat):
            r = ef.softmax_rows(rho_flat.reshape(4, 3))
            return float((a * r).sum() + 0.5 * (r * r).sum())

        r = ef.softmax_rows(rho)
        got = ef.softmax_chain(r, a + r).reshape(-1)
        flat = rho.reshape(-1)
        h = 1e-6
        fd = np.empty_like(flat)
        for i in range(flat.size):
            up, dn = flat.copy(), flat.copy()
            up[i] += h
            dn[i] -= h
            fd[i] = (loss(up) - loss(dn)) / (2.0 * h)
        assert_allclose(got, fd, atol=1e-7)

    def test_chain_shape_mismatch(self):
        with pytest.raises(ValueError):
            ef.softmax_chain(np.ones((2, 3)) / 3.0, np.ones((3, 2)))


class TestEntropy:
    def test_examples(self):
        assert_allclose(
            ef.categorical_entropy(np.full((2, 4), 0.25)),
            2.0 * np.log(4.0),
            rtol=1e-12,
        )
        assert ef.categorical_entropy(np.array([[1.0, 0.0], [0.0, 1.0]])) == 0.0
        # frozen: mpmath direct sum, 50 digits
        assert_allclose(
            ef.categorical_entropy(np.array([[0.25, 0.75]])),
            0.56233514461880835,
            rtol=1e-12,
        )

    def test_underflow_is_finite(self):
        r = ef.softmax_rows(np.array([[0.0, -800.0]]))
        assert np.isfinite(ef.categorical_entropy(r))


class TestLogitTable:
    def test_cached_responsibilities(self):
        rng = np.random.default_rng(17)
        rho = rng.normal(size=(12, 4)) * 2.0
        t = ef.LogitTable(rho)
        assert_allclose(t.r, ef.softmax_rows(rho), atol=1e-300)
        assert_allclose(t.r.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(t.r > 0.0)
        assert np.all(t.r <= 1.0)

    def test_rho_stored_verbatim(self):
        rho = np.array([[100.0, 101.0], [-3.0, 5.0]])
        t = ef.LogitTable(rho)
        assert_allclose(t.rho, rho)

    def test_flat_round_trip(self):
        rng = np.random.default_rng(19)
        t = ef.LogitTable(rng.normal(size=(5, 3)))
        t2 = t.with_flat(t.flat)
        assert_allclose(t2.rho, t.rho)
        assert_allclose(t2.r, t.r)
        with pytest.raises(ValueError):
            t.with_flat(np.zeros(7))

    def test_extreme_logits_clamped(self):
        t = ef.LogitTable(np.array([[0.0, -2000.0]]))
        assert np.all(t.r > 0.0)
        assert np.isfinite(np.log(t.r)).all()

    def test_invalid_rho(self):
        with pytest.raises(ValueError):
            ef.LogitTable(np.array([[np.nan, 0.0]]))
        with pytest.raises(ValueError):
            ef.LogitTable(np.zeros(4))


class TestSparseLogitTable:
    def test_segment_softmax(self):
        indptr = np.array([0, 2, 5, 6])
        cols = np.array([0, 1, 0, 2, 3, 1])
        rho = np.array([0.0, 0.0, 1.0, 1.0, 1.0, 4.2])
        t = ef.SparseLogitTable(indptr, cols, rho)
        assert_allclose(t.r[0:2], [0.5, 0.5])
        assert_allclose(t.r[2:5], np.full(3, 1.0 / 3.0))
        assert_allclose(t.r[5], 1.0)
        assert t.n == 3 and t.nnz == 6

    def test_flat_round_trip(self):
        indptr = np.array([0, 3, 4])
        t = ef.SparseLogitTable(indptr, np.arange(4), np.zeros(4))
        t2 = t.with_flat(np.array([1.0, 2.0, 3.0, 4.0]))
        assert_allclose(t2.indptr, indptr)
        sums = np.add.reduceat(t2.r, indptr[:-1])
        assert_allclose(sums, 1.0, atol=1e-12)

    def test_invalid_layout(self):
        with pytest.raises(ValueError):
            ef.SparseLogitTable(np.array([0, 2, 2]), np.arange(2), np.zeros(2))
        with pytest.raises(ValueError):
            ef.SparseLogitTable(np.array([0, 3]), np.arange(2), np.zeros(2))


class TestExpectationsAndKl:
    def test_dirichlet_expect_ln(self):
        a = np.array([0.5, 2.0, 7.5])
        got = ef.dirichlet_expect_ln(ef.DirichletParams(a))
        want = sp.digamma(a) - sp.digamma(a.sum())
        assert_allclose(got, want, rtol=1e-12)

    def test_dirichlet_kl_vs_scipy(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            k = int(rng.integers(2, 8))
            aq = rng.uniform(0.1, 20.0, k)
            ap = rng.uniform(0.1, 20.0, k)
            want = (
                sp.gammaln(aq.sum())
                - sp.gammaln(aq).sum()
                - sp.gammaln(ap.sum())
                + sp.gammaln(ap).sum()
                + ((aq - ap) * (sp.digamma(aq) - sp.digamma(aq.sum()))).sum()
            )
            assert_allclose(ef.dirichlet_kl(aq, ap), want, rtol=1e-10, atol=1e-10)

    def test_dirichlet_kl_properties(self):
        a = ef.DirichletParams([0.7, 1.3, 4.0])
        assert abs(ef.dirichlet_kl(a, a)) < 1e-12
        b = ef.DirichletParams([2.0, 2.0, 2.0])
        assert ef.dirichlet_kl(a, b) > 0.0

    def test_gw_expect_ln_det(self):
        # E[ln|Lambda|] under Wishart(df=nu, scale=S^-1), MC cross-check
        q = ef.GaussWishartParams(
            m=[0.0, 0.0], kappa=2.0, nu=6.0, S=[[2.0, 0.4], [0.4, 1.0]]
        )
        rng = np.random.default_rng(29)
        lam = wishart.rvs(
            df=q.nu, scale=np.linalg.inv(q.S), size=20000, random_state=rng
        )
        ld = np.linalg.slogdet(lam)[1]
        se = ld.std(ddof=1) / np.sqrt(ld.size)
        assert abs(ef.gauss_wishart_expect_ln_det(q) - ld.mean()) < 4.0 * se

    def test_gw_kl_self_zero(self):
        q = ef.GaussWishartParams(
            m=[0.3, -0.2], kappa=3.0, nu=5.0, S=[[2.0, 0.3], [0.3, 1.5]]
        )
        assert abs(ef.gauss_wishart_kl(q, q)) < 1e-12

    def test_gw_kl_monte_carlo(self):
        q = ef.GaussWishartParams(
            m=[0.3, -0.2], kappa=3.0, nu=5.0, S=[[2.0, 0.3], [0.3, 1.5]]
        )
        p = ef.GaussWishartParams(m=[0.0, 0.0], kappa=1.0, nu=2.5, S=np.eye(2))
        closed = ef.gauss_wishart_kl(q, p)

        rng = np.random.default_rng(42)
        n = 100000
        lam = wishart.rvs(
            df=q.nu, scale=np.linalg.inv(q.S), size=n, random_state=rng
        )
        covs = np.linalg.inv(q.kappa * lam)
        chol = np.linalg.cholesky(covs)
        mu = q.m + np.einsum(
            "nij,nj->ni", chol, rng.standard_normal((n, 2))
        )

        def log_joint(gwp):
            lw = wishart.logpdf(
                lam.transpose(1, 2, 0), df=gwp.nu, scale=np.linalg.inv(gwp.S)
            )
            ld = np.linalg.slogdet(lam)[1]
            diff = mu - gwp.m
            quad = np.einsum("ni,nij,nj->n", diff, lam, diff)
            d = gwp.dim
            return lw + (
                -0.5 * d * np.log(2.0 * np.pi)
                + 0.5 * d * np.log(gwp.kappa)
                + 0.5 * ld
                - 0.5 * gwp.kappa * quad
            )

        samples = log_joint(q) - log_joint(p)
        est = samples.mean()
        se = samples.std(ddof=1) / np.sqrt(n)
        assert abs(closed - est) < 4.0 * se
