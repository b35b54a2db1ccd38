import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from lobforge.errors import NotPositiveDefinite
from lobforge.stochastic import (
    ConstantSize,
    GammaMixtureSize,
    SkewTParams,
    bessel_k_quadrature,
    intensity_transform,
    mean_order_size,
    sample_inverse_wishart,
    sample_order_size,
    sample_order_sizes,
    sample_poisson_vector,
    sample_skew_t,
    sample_truncated_poisson,
    skew_t_log_density,
)


class ScriptedRng:
    """Duck-typed generator returning preset values."""

    def __init__(self, gamma_value, normal_value):
        self.gamma_value = gamma_value
        self.normal_value = normal_value

    def gamma(self, shape, scale, size=None):
        return self.gamma_value

    def standard_normal(self, size=None):
        return np.asarray(self.normal_value)


class TestSampleSkewT:
    def test_scripted_mixture_substitution(self):
        # W = 1 (gamma draw 1), Z = z: output is exactly m + beta + chol z
        m = np.array([1.0, -1.0])
        beta = np.array([0.5, 2.0])
        z = np.array([0.3, -0.7])
        params = SkewTParams(m=m, beta=beta, nu=4.0, sigma=np.eye(2))
        out = sample_skew_t(params, ScriptedRng(1.0, z))
        assert np.allclose(out, m + beta + z)

    def test_symmetric_case_matches_student_t_moments(self):
        # beta=0, Sigma=I, nu=6: mean 0, covariance (nu/(nu-2)) I = 1.5 I
        rng = np.random.default_rng(42)
        params = SkewTParams(m=[0.0, 0.0], beta=[0.0, 0.0], nu=6.0, sigma=np.eye(2))
        n = 100_000
        x = sample_skew_t(params, rng, size=n)
        se_mean = x.std(axis=0) / math.sqrt(n)
        assert np.all(np.abs(x.mean(axis=0)) < 3 * se_mean)
        target = 1.5
        for j in range(2):
            c = x[:, j] * x[:, j]
            se = c.std() / math.sqrt(n)
            assert abs(c.mean() - target) < 3 * se
        cross = x[:, 0] * x[:, 1]
        assert abs(cross.mean()) < 3 * cross.std() / math.sqrt(n)

    def test_skewed_mean_is_m_plus_beta_ew(self):
        # E[Gamma] = m + beta * nu/(nu-2); component 1 has beta = 1, nu = 6
        rng = np.random.default_rng(7)
        params = SkewTParams(m=[0.0, 0.0], beta=[1.0, 0.0], nu=6.0, sigma=np.eye(2))
        n = 100_000
        x = sample_skew_t(params, rng, size=n)
        se = x[:, 0].std() / math.sqrt(n)
        assert abs(x[:, 0].mean() - 1.5) < 3 * se

    def test_near_gaussian_for_huge_nu(self):
        rng = np.random.default_rng(3)
        m = np.array([0.5, -0.5])
        sigma = np.array([[1.0, 0.4], [0.4, 2.0]])
        params = SkewTParams(m=m, beta=[0.0, 0.0], nu=1e6, sigma=sigma)
        n = 100_000
        x = sample_skew_t(params, rng, size=n)
        y = rng.multivariate_normal(m, sigma, size=n)
        for j in range(2):
            se = math.sqrt(x[:, j].var() / n + y[:, j].var() / n)
            assert abs(x[:, j].mean() - y[:, j].mean()) < 3 * se
            cx, cy = (x[:, j] - m[j]) ** 2, (y[:, j] - m[j]) ** 2
            se2 = math.sqrt(cx.var() / n + cy.var() / n)
            assert abs(cx.mean() - cy.mean()) < 3 * se2

    def test_rejects_non_spd_sigma(self):
        with pytest.raises(NotPositiveDefinite):
            SkewTParams(m=[0.0, 0.0], beta=[0.0, 0.0], nu=5.0, sigma=[[1.0, 2.0], [2.0, 1.0]])

    def test_reproducible(self):
        params = SkewTParams(m=[0.0], beta=[1.0], nu=5.0, sigma=[[1.0]])
        a = sample_skew_t(params, np.random.default_rng(11), size=5)
        b = sample_skew_t(params, np.random.default_rng(11), size=5)
        assert np.array_equal(a, b)


class TestSkewTDensity:
    def test_univariate_symmetric_matches_student_t(self):
        params = SkewTParams(m=[0.0], beta=[0.0], nu=5.0, sigma=[[1.0]])
        got = skew_t_log_density([0.0], params)
        assert abs(got - stats.t.logpdf(0.0, 5)) < 1e-12

    def test_symmetry_about_location(self):
        params = SkewTParams(m=[0.7], beta=[0.0], nu=8.0, sigma=[[2.0]])
        for x in (0.0, 1.3, -2.0):
            a = skew_t_log_density([x], params)
            b = skew_t_log_density([2 * 0.7 - x], params)
            assert abs(a - b) < 1e-12

    def test_density_integrates_to_one(self):
        params = SkewTParams(m=[0.0], beta=[2.0], nu=8.0, sigma=[[1.0]])
        val, _ = integrate.quad(
            lambda x: math.exp(skew_t_log_density([x], params)), -np.inf, np.inf, limit=400
        )
        assert abs(val - 1.0) < 1e-3

    def test_symmetric_matches_multivariate_t_on_grid(self):
        sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
        params = SkewTParams(m=[1.0, -1.0], beta=[0.0, 0.0], nu=6.0, sigma=sigma)
        oracle = stats.multivariate_t(loc=[1.0, -1.0], shape=sigma, df=6.0)
        for x0 in np.linspace(-3, 3, 7):
            for x1 in np.linspace(-3, 3, 7):
                got = skew_t_log_density([x0, x1], params)
                assert abs(got - oracle.logpdf([x0, x1])) < 1e-8

    def test_skewed_density_matches_mixture_quadrature(self):
        # direct numerical integration over the mixing variable as oracle
        nu, m, b, s2 = 8.0, 0.5, 2.0, 1.3
        params = SkewTParams(m=[m], beta=[b], nu=nu, sigma=[[s2]])

        def oracle_pdf(x):
            a = nu / 2

            def integrand(w):
                return stats.norm.pdf(x, loc=m + b * w, scale=math.sqrt(w * s2)) * stats.invgamma.pdf(
                    w, a, scale=a
                )

            v, _ = integrate.quad(integrand, 0, np.inf, limit=400)
            return v

        for x in (-1.0, 0.3, 4.0):
            got = math.exp(skew_t_log_density([x], params))
            assert abs(got - oracle_pdf(x)) < 1e-9

    def test_bessel_quadrature_matches_scipy(self):
        for v, z in [(2.5, 0.7), (7.0, 3.0), (4.5, 10.0), (16.5, 25.0)]:
            got = bessel_k_quadrature(v, z)
            want = float(special.kve(v, z)) * math.exp(-z)
            assert abs(got - want) <= 1e-10 * abs(want) + 1e-300


class TestIntensityTransform:
    def test_zero_gives_half_baseline(self):
        lam = intensity_transform(np.zeros(3), np.array([2.0, 4.0, 10.0]))
        assert np.allclose(lam, [1.0, 2.0, 5.0])

    def test_limits(self):
        mu0 = np.array([3.0])
        assert intensity_transform(np.array([40.0]), mu0)[0] == pytest.approx(3.0)
        assert intensity_transform(np.array([-40.0]), mu0)[0] == pytest.approx(0.0, abs=1e-12)

    def test_five_percent_quantile(self):
        lam = intensity_transform(np.array([-1.6449]), np.array([10.0]))
        assert abs(lam[0] - 0.5) < 1e-3

    def test_strictly_increasing_and_bounded(self):
        mu0 = np.full(101, 7.0)
        g = np.linspace(-6, 6, 101)
        lam = intensity_transform(g, mu0)
        assert np.all(np.diff(lam) > 0)
        assert np.all(lam > 0) and np.all(lam < 7.0)


class TestPoissonVector:
    def test_zero_intensity(self):
        rng = np.random.default_rng(0)
        assert np.all(sample_poisson_vector(np.zeros(4), rng) == 0)

    def test_moments(self):
        rng = np.random.default_rng(1)
        n = 100_000
        draws = sample_poisson_vector(np.full(n, 5.0), rng)
        se = draws.std() / math.sqrt(n)
        assert abs(draws.mean() - 5.0) < 3 * se
        c = (draws - draws.mean()) ** 2
        assert abs(c.mean() - 5.0) < 3 * c.std() / math.sqrt(n)

    def test_conditional_independence(self):
        rng = np.random.default_rng(2)
        n = 100_000
        lam = np.broadcast_to(np.array([1.0, 2.0, 3.0]), (n, 3))
        draws = sample_poisson_vector(lam, rng)
        for i in range(3):
            for j in range(i + 1, 3):
                r = np.corrcoef(draws[:, i], draws[:, j])[0, 1]
                assert abs(r) < 3 / math.sqrt(n)


class TestTruncatedPoisson:
    def test_single_point_support(self):
        rng = np.random.default_rng(0)
        assert all(sample_truncated_poisson(3.0, 0, rng) == 0 for _ in range(50))

    def test_pmf_lambda2_v3(self):
        # unnormalised terms 1, 2, 2, 4/3 with normaliser 19/3:
        # p = (3/19, 6/19, 6/19, 4/19)
        rng = np.random.default_rng(11)
        n = 100_000
        counts = np.zeros(4)
        for _ in range(n):
            counts[sample_truncated_poisson(2.0, 3, rng)] += 1
        p = np.array([3, 6, 6, 4]) / 19
        freq = counts / n
        se = np.sqrt(p * (1 - p) / n)
        assert np.all(np.abs(freq - p) < 3 * se)

    def test_untruncated_regime(self):
        rng = np.random.default_rng(5)
        n = 50_000
        draws = np.array([sample_truncated_poisson(2.0, 1000, rng) for _ in range(n)])
        se = draws.std() / math.sqrt(n)
        assert abs(draws.mean() - 2.0) < 3 * se

    @pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("v", [1, 3, 20])
    def test_total_variation_against_bruteforce(self, lam, v):
        rng = np.random.default_rng(int(lam * 100 + v))
        n = 100_000
        counts = np.zeros(v + 1)
        for _ in range(n):
            counts[sample_truncated_poisson(lam, v, rng)] += 1
        j = np.arange(v + 1)
        terms = np.array([lam**k / math.factorial(k) for k in j])
        pmf = terms / terms.sum()
        tv = 0.5 * np.abs(counts / n - pmf).sum()
        assert tv < 0.01

    def test_reproducible(self):
        a = [sample_truncated_poisson(3.0, 10, np.random.default_rng(9)) for _ in range(3)]
        b = [sample_truncated_poisson(3.0, 10, np.random.default_rng(9)) for _ in range(3)]
        assert a == b


class TestOrderSizes:
    def test_constant(self):
        rng = np.random.default_rng(0)
        assert sample_order_size(ConstantSize(1), rng) == 1
        assert np.all(sample_order_sizes(ConstantSize(7), 100, rng) == 7)

    def test_exponential_component_mean(self):
        # w=1, kappa=1, theta=100: ceil(Exp(100)) has mean 1/(1-exp(-1/100))
        rng = np.random.default_rng(21)
        model = GammaMixtureSize(w=1.0, kappa1=1.0, theta1=100.0, kappa2=2.0, theta2=1.0)
        n = 100_000
        sizes = sample_order_sizes(model, n, rng)
        target = 1.0 / (1.0 - math.exp(-0.01))
        se = sizes.std() / math.sqrt(n)
        assert abs(sizes.mean() - target) < 3 * se

    def test_gamma_component_mode(self):
        # w=0, kappa2=2, theta2=50: mode at (kappa-1)*theta = 50
        rng = np.random.default_rng(22)
        model = GammaMixtureSize(w=0.0, kappa1=1.0, theta1=1.0, kappa2=2.0, theta2=50.0)
        sizes = sample_order_sizes(model, 200_000, rng)
        hist = np.bincount(sizes)
        # histogram in bins of width 10 to smooth; mode near 50
        width = 10
        nb = (len(hist) // width + 1) * width
        padded = np.zeros(nb)
        padded[: len(hist)] = hist
        coarse = padded.reshape(-1, width).sum(axis=1)
        mode_bin = int(np.argmax(coarse))
        assert abs((mode_bin * width + width / 2) - 50) <= 15

    def test_sizes_always_at_least_one(self):
        rng = np.random.default_rng(23)
        model = GammaMixtureSize(w=0.5, kappa1=0.2, theta1=0.1, kappa2=2.0, theta2=0.1)
        sizes = sample_order_sizes(model, 10_000, rng)
        assert sizes.min() >= 1

    def test_mean_order_size(self):
        assert mean_order_size(ConstantSize(4)) == 4
        m = GammaMixtureSize(w=0.5, kappa1=1.0, theta1=10.0, kappa2=2.0, theta2=10.0)
        assert mean_order_size(m) == 15


class TestInverseWishart:
    def test_mean_matches_formula(self):
        # E[IW(I, 10)] = I / (10 - 2 - 1) = I/7 for d = 2
        rng = np.random.default_rng(30)
        n = 10_000
        draws = np.stack([sample_inverse_wishart(np.eye(2), 10.0, rng) for _ in range(n)])
        for i in range(2):
            for j in range(2):
                target = (1 / 7) if i == j else 0.0
                se = draws[:, i, j].std() / math.sqrt(n)
                assert abs(draws[:, i, j].mean() - target) < 3 * se

    def test_always_spd(self):
        rng = np.random.default_rng(31)
        scale = np.array([[2.0, 0.5], [0.5, 1.0]])
        for _ in range(500):
            s = sample_inverse_wishart(scale, 6.5, rng)
            np.linalg.cholesky(s)  # raises if not SPD

    def test_deterministic_given_seed(self):
        a = sample_inverse_wishart(np.eye(3), 8.0, np.random.default_rng(77))
        b = sample_inverse_wishart(np.eye(3), 8.0, np.random.default_rng(77))
        assert np.array_equal(a, b)

    def test_invalid_scale_rejected(self):
        rng = np.random.default_rng(0)
        with pytest.raises(NotPositiveDefinite):
            sample_inverse_wishart(np.array([[1.0, 3.0], [3.0, 1.0]]), 8.0, rng)

    def test_dof_guard(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            sample_inverse_wishart(np.eye(3), 1.5, rng)
