"""Probability kernels: multivariate skew-t sampling and density, the
normal-CDF intensity transform, Poisson and truncated-Poisson counts,
order-size models, and Inverse-Wishart draws.

All samplers take an explicit ``numpy.random.Generator`` and are
reproducible: identical generator state yields an identical output
sequence.  Generators are not shareable across threads; concurrent
consumers should spawn independent child streams from a master seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg, special

from .errors import NotPositiveDefinite

__all__ = [
    "SkewTParams",
    "ConstantSize",
    "GammaMixtureSize",
    "sample_skew_t",
    "skew_t_log_density",
    "intensity_transform",
    "sample_poisson_vector",
    "sample_truncated_poisson",
    "sample_order_size",
    "sample_order_sizes",
    "mean_order_size",
    "sample_inverse_wishart",
    "bessel_k_quadrature",
]


def spd_cholesky(sigma: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, raising NotPositiveDefinite on failure."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise NotPositiveDefinite("matrix must be square")
    if not np.allclose(sigma, sigma.T, rtol=1e-10, atol=1e-12):
        raise NotPositiveDefinite("matrix must be symmetric")
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc


@dataclass(frozen=True)
class SkewTParams:
    """Location m, skewness beta, degrees of freedom nu, covariance sigma.

    ``nu`` is treated as a positive real; the scale mixture
    ``m + beta*W + sqrt(W)*Z`` with ``W ~ InvGamma(nu/2, nu/2)`` and
    ``Z ~ N(0, sigma)`` is well defined for any ``nu > 0``.
    """

    m: np.ndarray
    beta: np.ndarray
    nu: float
    sigma: np.ndarray

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma", sigma)
        if self.nu <= 0:
            raise ValueError("nu must be > 0")
        d = m.shape[0]
        if beta.shape[0] != d or sigma.shape != (d, d):
            raise ValueError("m, beta, sigma dimensions are inconsistent")
        spd_cholesky(sigma)

    @property
    def dim(self) -> int:
        return self.m.shape[0]


def _skew_t_draw(m, beta, nu, chol, rng):
    """One draw of the scale mixture given a precomputed Cholesky factor.

    Consumes the stream in a fixed order: the inverse-gamma mixing draw
    first, then the Gaussian vector.
    """
    w = 1.0 / rng.gamma(0.5 * nu, 2.0 / nu)
    z = rng.standard_normal(m.shape[0])
    return m + beta * w + math.sqrt(w) * (chol @ z)


def sample_skew_t(params: SkewTParams, rng, size: int | None = None) -> np.ndarray:
    """Draw from the multivariate skew-t via its scale mixture.

    Returns a vector for ``size=None`` and an ``(size, d)`` array otherwise.
    """
    chol = spd_cholesky(params.sigma)
    if size is None:
        return _skew_t_draw(params.m, params.beta, params.nu, chol, rng)
    w = 1.0 / rng.gamma(0.5 * params.nu, 2.0 / params.nu, size=size)
    z = rng.standard_normal((size, params.dim))
    return (
        params.m[None, :]
        + params.beta[None, :] * w[:, None]
        + np.sqrt(w)[:, None] * (z @ chol.T)
    )


def bessel_k_quadrature(v: float, z: float, rtol: float = 1e-10) -> float:
    """Modified Bessel function of the second kind by adaptive quadrature.

    Integrates (1/2) * int_0^inf y^(v-1) exp(-(z/2)(y + 1/y)) dy using the
    substitution y = e^u.  Validation-path only; never used in sampling.
    """
    if z <= 0:
        raise ValueError("z must be > 0")

    def integrand(u):
        # z*cosh(u) overflows long after the integrand has underflowed to 0
        if abs(u) > 700.0:
            return 0.0
        arg = v * u - z * math.cosh(u)
        return math.exp(arg) if arg > -745.0 else 0.0

    # peak of the integrand sits at sinh(u) = v/z
    u0 = math.asinh(abs(v) / z)
    hi = max(u0 + 60.0, 60.0)
    val, _ = integrate.quad(
        integrand,
        -hi,
        hi,
        points=[-u0, 0.0, u0],
        epsabs=0.0,
        epsrel=rtol,
        limit=400,
    )
    return 0.5 * val


def skew_t_log_density(x: np.ndarray, params: SkewTParams) -> float:
    """Log density of the skew-t at ``x``.

    For ``beta != 0`` this is the analytically integrated scale mixture
    (the generalized-hyperbolic skew-t form, with the Bessel-function
    factor); for ``beta = 0`` it reduces to the multivariate Student-t
    density, which is used directly.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = params.dim
    nu = params.nu
    chol = spd_cholesky(params.sigma)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    dev = x - params.m
    y = linalg.solve_triangular(chol, dev, lower=True)
    q = float(y @ y)
    if np.all(params.beta == 0.0):
        return float(
            special.gammaln(0.5 * (nu + d))
            - special.gammaln(0.5 * nu)
            - 0.5 * d * math.log(nu * math.pi)
            - 0.5 * logdet
            - 0.5 * (nu + d) * math.log1p(q / nu)
        )
    bvec = linalg.solve_triangular(chol, params.beta, lower=True)
    b = float(bvec @ bvec)
    c1 = float(y @ bvec)
    lam = 0.5 * (nu + d)
    z = math.sqrt((nu + q) * b)
    log_k = math.log(special.kve(lam, z)) - z
    return float(
        (1.0 - 0.5 * d) * math.log(2.0)
        - 0.5 * d * math.log(math.pi)
        - 0.5 * logdet
        + 0.5 * nu * math.log(0.5 * nu)
        - special.gammaln(0.5 * nu)
        + c1
        + log_k
        - lam * math.log(z)
        + lam * math.log(b)
    )


def intensity_transform(gamma: np.ndarray, mu0: np.ndarray) -> np.ndarray:
    """Element-wise lambda = mu0 * Phi(gamma), Phi the standard normal CDF."""
    gamma = np.asarray(gamma, dtype=float)
    mu0 = np.asarray(mu0, dtype=float)
    if np.any(mu0 <= 0):
        raise ValueError("baseline intensities must be positive")
    return mu0 * special.ndtr(gamma)


def sample_poisson_vector(lam: np.ndarray, rng) -> np.ndarray:
    """Independent Poisson counts per element, conditional on ``lam``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam < 0):
        raise ValueError("intensities must be finite and non-negative")
    return rng.poisson(lam).astype(np.int64)


def sample_truncated_poisson(lam: float, v: int, rng) -> int:
    """Poisson(lam) conditioned on the support {0, ..., v}.

    Exact inverse-CDF draw over the finite support using the normaliser
    sum_{j=0}^{v} lam^j / j!; consumes exactly one uniform.  The support
    scan is capped where the remaining upper-tail mass is below 1e-12 of
    the total, which leaves the law unchanged at double precision.
    """
    v = int(v)
    if v < 0:
        raise ValueError("v must be >= 0")
    if v == 0 or lam <= 0.0:
        # degenerate support or zero intensity: still consume one uniform
        # so stream alignment does not depend on the book state
        rng.random()
        return 0
    kmax = min(v, int(lam + 12.0 * math.sqrt(lam) + 50.0))
    j = np.arange(kmax + 1)
    logt = j * math.log(lam) - special.gammaln(j + 1)
    t = np.exp(logt - logt.max())
    cum = np.cumsum(t)
    u = rng.random()
    return int(np.searchsorted(cum, u * cum[-1], side="left"))


@dataclass(frozen=True)
class ConstantSize:
    """Every order has the same fixed size c >= 1."""

    c: int = 1

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("constant order size must be >= 1")


@dataclass(frozen=True)
class GammaMixtureSize:
    """w * Gamma(kappa1, theta1) + (1-w) * Gamma(kappa2, theta2), ceiled to
    an integer share count >= 1."""

    w: float
    kappa1: float
    theta1: float
    kappa2: float
    theta2: float

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("mixture weight must lie in [0, 1]")
        if min(self.kappa1, self.theta1, self.kappa2, self.theta2) <= 0:
            raise ValueError("gamma shapes and scales must be positive")


OrderSizeModel = ConstantSize | GammaMixtureSize


def mean_order_size(model: OrderSizeModel) -> int:
    """Integer mean size used when seeding default books."""
    if isinstance(model, ConstantSize):
        return model.c
    mean = model.w * model.kappa1 * model.theta1 + (1.0 - model.w) * model.kappa2 * model.theta2
    return max(1, int(round(mean)))


def sample_order_sizes(model: OrderSizeModel, n: int, rng) -> np.ndarray:
    """Vector of n independent order sizes.

    The constant model consumes no randomness.  The gamma mixture consumes
    one uniform vector (component choice) and one gamma vector, then ceils,
    guaranteeing integer sizes >= 1.
    """
    n = int(n)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    if isinstance(model, ConstantSize):
        return np.full(n, model.c, dtype=np.int64)
    u = rng.random(n)
    first = u < model.w
    shape = np.where(first, model.kappa1, model.kappa2)
    scale = np.where(first, model.theta1, model.theta2)
    draws = rng.gamma(shape, scale)
    return np.maximum(1, np.ceil(draws)).astype(np.int64)


def sample_order_size(model: OrderSizeModel, rng) -> int:
    """One order size (shares), always >= 1."""
    return int(sample_order_sizes(model, 1, rng)[0])


def sample_inverse_wishart(scale: np.ndarray, dof: float, rng) -> np.ndarray:
    """Inverse-Wishart draw via the Bartlett decomposition.

    Samples W ~ Wishart(dof, scale^{-1}) through its Bartlett factor and
    returns W^{-1} ~ IW(scale, dof).  ``dof`` may be any real > d - 1.
    Stream order: the chi-square vector first, then the Gaussian matrix.
    """
    scale = np.atleast_2d(np.asarray(scale, dtype=float))
    d = scale.shape[0]
    chol_scale = spd_cholesky(scale)
    if dof <= d - 1:
        raise ValueError("dof must exceed d - 1")
    inv_scale = linalg.cho_solve((chol_scale, True), np.eye(d))
    inv_scale = 0.5 * (inv_scale + inv_scale.T)
    c = np.linalg.cholesky(inv_scale)
    chis = rng.chisquare(dof - np.arange(d))
    a = np.tril(rng.standard_normal((d, d)), -1) + np.diag(np.sqrt(chis))
    f = c @ a  # lower triangular; W = f f^T ~ Wishart(dof, scale^{-1})
    g = linalg.solve_triangular(f, np.eye(d), lower=True)
    out = g.T @ g
    return 0.5 * (out + out.T)
