"""Transformation from book states to auxiliary data, and the auxiliary
model estimators: GARCH(1,1) on 1-minute mid-price log returns and
ARIMA(0,1,1) on resting volume, plus ACF/PACF and the ARCH-LM test.

Both fitters are deterministic given their input: fixed initialisation,
quasi-Newton optimisation in an unconstrained reparameterisation
(gradient-norm tolerance 1e-8, at most 500 iterations), stationarity /
invertibility enforced with a 1e-6 margin.  Fits can be pooled across
several realisations by summing log-likelihoods with shared parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .errors import DegenerateDay, DegenerateSeries, InvalidConfig

__all__ = [
    "AuxSeries",
    "AuxCoefficients",
    "Garch11Fit",
    "Ma1Fit",
    "transform",
    "fit_garch11",
    "fit_arima011",
    "fit_auxiliary",
    "acf_pacf",
    "arch_lm_test",
]

_MARGIN = 1e-6
_GTOL = 1e-8
_MAXITER = 500


@dataclass
class AuxSeries:
    """One day's auxiliary data: minute log returns of the mid price and
    the per-interval share volume resting within the first l_p ticks of
    each side's reference price."""

    returns: np.ndarray
    vol_bid: np.ndarray
    vol_ask: np.ndarray


@dataclass(frozen=True)
class AuxCoefficients:
    """Fitted auxiliary parameter vectors.

    ``beta1 = (a0, a1, b1)`` from the GARCH(1,1) price model;
    ``beta2 = (theta_bid, log_sigma_bid, theta_ask, log_sigma_ask)`` from
    the per-side ARIMA(0,1,1) volume fits (log of the innovation standard
    deviation; the drift intercept is a day-specific nuisance and is not
    part of beta2).
    """

    beta1: np.ndarray
    beta2: np.ndarray

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.beta1, self.beta2])

    def to_json_dict(self) -> dict:
        return {"beta1": self.beta1.tolist(), "beta2": self.beta2.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "AuxCoefficients":
        return cls(
            beta1=np.asarray(d["beta1"], dtype=float),
            beta2=np.asarray(d["beta2"], dtype=float),
        )

    @staticmethod
    def coefficient_names() -> tuple[str, ...]:
        return (
            "a0",
            "a1",
            "b1",
            "theta_bid",
            "log_sigma_bid",
            "theta_ask",
            "log_sigma_ask",
        )


def transform(result, delta_minutes: int = 1) -> AuxSeries:
    """Map a simulated or ingested day to auxiliary model data.

    The mid price is sampled at minute marks (interval boundaries at
    multiples of ``delta_minutes``) and differenced into log returns; the
    volume series is the passive-window share total per side at the native
    interval resolution.
    """
    snaps = getattr(result, "snapshots", result)
    step = delta_minutes * 60
    if step % snaps.interval_seconds != 0:
        raise InvalidConfig("minute marks must align with interval boundaries")
    stride = step // snaps.interval_seconds
    n_intervals = snaps.n_snapshots - 1
    n_marks = n_intervals // stride
    if n_marks < 2:
        raise DegenerateDay("need at least two mid-price samples")
    mids = np.empty(n_marks, dtype=float)
    for k in range(1, n_marks + 1):
        idx = k * stride
        bb = int(snaps.best_bid[idx])
        ba = int(snaps.best_ask[idx])
        if bb < 0 or ba < 0:
            raise DegenerateDay(f"one-sided book at minute mark {k}")
        mids[k - 1] = 0.5 * (bb + ba)
    returns = np.diff(np.log(mids))
    passive = slice(snaps.l_d, snaps.l_t)  # levels s = 1..l_p
    vol_bid = snaps.bid_shares[1:, passive].sum(axis=1).astype(float)
    vol_ask = snaps.ask_shares[1:, passive].sum(axis=1).astype(float)
    return AuxSeries(returns=returns, vol_bid=vol_bid, vol_ask=vol_ask)


# ----------------------------------------------------------------------
# GARCH(1,1) quasi-MLE


@dataclass
class Garch11Fit:
    a0: float
    a1: float
    b1: float
    loglik: float
    converged: bool
    at_boundary: bool
    stderr: np.ndarray  # asymptotic standard errors of (a0, a1, b1)

    @property
    def params(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.b1])


def _garch_nll(params: np.ndarray, series_list: list[np.ndarray]) -> float:
    a0, a1, b1 = params
    if a0 <= 0 or a1 < 0 or b1 < 0 or a1 + b1 >= 1.0:
        return np.inf
    total = 0.0
    for r in series_list:
        r2 = r * r
        h = float(np.var(r))
        if h <= 0:
            return np.inf
        acc = 0.0
        for t in range(r.shape[0]):
            if t > 0:
                h = a0 + a1 * r2[t - 1] + b1 * h
            if h < 1e-300:
                h = 1e-300
            acc += math.log(h) + r2[t] / h
        total += 0.5 * (acc + r.shape[0] * math.log(2.0 * math.pi))
    return total


def _garch_unpack(x: np.ndarray) -> np.ndarray:
    a0 = math.exp(x[0])
    persistence = (1.0 - _MARGIN) / (1.0 + math.exp(-x[1]))
    share = 1.0 / (1.0 + math.exp(-x[2]))
    return np.array([a0, persistence * share, persistence * (1.0 - share)])


def fit_garch11(returns) -> Garch11Fit:
    """Gaussian quasi-MLE of the GARCH(1,1) volatility recursion.

    ``returns`` may be one series or a list of series; a list is fitted by
    pooling (shared coefficients, summed log-likelihood).  The recursion is
    initialised at each series' sample variance.  Raises DegenerateSeries
    for constant or too-short input; non-convergence is reported through
    the ``converged`` flag with the best iterate returned.
    """
    series_list = _as_series_list(returns)
    for r in series_list:
        if r.shape[0] < 50:
            raise DegenerateSeries("need at least 50 return observations")
        if float(np.var(r)) <= 0.0:
            raise DegenerateSeries("returns are constant")

    var0 = float(np.mean([np.var(r) for r in series_list]))
    n_total = sum(r.shape[0] for r in series_list)

    # optimise the per-observation mean so copies of one series yield the
    # exact same objective (and therefore the exact same fit) as the single
    def nll_x(x):
        return _garch_nll(_garch_unpack(x), series_list) / n_total

    starts = []
    for a1_0, b1_0 in ((0.05, 0.90), (0.10, 0.80), (0.02, 0.50)):
        s = a1_0 + b1_0
        u = a1_0 / s
        starts.append(
            np.array(
                [
                    math.log(max(var0 * (1.0 - s), 1e-300)),
                    math.log(s / (1.0 - s)),
                    math.log(u / (1.0 - u)),
                ]
            )
        )
    starts.append(
        np.array([math.log(max(var0 * 0.98, 1e-300)), math.log(0.02 / 0.98), 0.0])
    )
    candidates = []
    for x0 in starts:
        res = optimize.minimize(
            nll_x,
            x0,
            method="L-BFGS-B",
            options={"maxiter": _MAXITER, "gtol": _GTOL, "ftol": 1e-12},
        )
        candidates.append(res)
    best_fun = min(res.fun for res in candidates)
    # on an unidentified ridge (no ARCH signal) the minima differ by noise
    # only; break the tie deterministically toward the lowest persistence
    near = [res for res in candidates if res.fun <= best_fun + 2.0 / n_total]
    best = min(near, key=lambda res: _garch_unpack(res.x)[1:].sum())
    params = _garch_unpack(best.x)
    a0, a1, b1 = params
    stderr = _asymptotic_stderr(lambda p: _garch_nll(p, series_list), params)
    persistence = 1.0 / (1.0 + math.exp(-best.x[1]))
    return Garch11Fit(
        a0=float(a0),
        a1=float(a1),
        b1=float(b1),
        loglik=-float(best.fun) * n_total,
        converged=bool(best.success),
        at_boundary=bool(persistence > 1.0 - 1e-4),
        stderr=stderr,
    )


def _as_series_list(x) -> list[np.ndarray]:
    if isinstance(x, (list, tuple)):
        return [np.asarray(r, dtype=float).ravel() for r in x]
    return [np.asarray(x, dtype=float).ravel()]


def _asymptotic_stderr(nll, params: np.ndarray) -> np.ndarray:
    """Standard errors from a central-difference Hessian of the NLL."""
    n = params.shape[0]
    h = np.maximum(1e-5 * np.abs(params), 1e-9)
    hess = np.zeros((n, n))
    f0 = nll(params)
    for i in range(n):
        pp = params.copy()
        pp[i] += h[i]
        pm = params.copy()
        pm[i] -= h[i]
        hess[i, i] = (nll(pp) - 2.0 * f0 + nll(pm)) / (h[i] ** 2)
        for j in range(i + 1, n):
            fs = []
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                p = params.copy()
                p[i] += si * h[i]
                p[j] += sj * h[j]
                fs.append(nll(p))
            hess[i, j] = hess[j, i] = (fs[0] - fs[1] - fs[2] + fs[3]) / (
                4.0 * h[i] * h[j]
            )
    try:
        cov = np.linalg.inv(hess)
        diag = np.diag(cov)
        return np.sqrt(np.where(diag > 0, diag, np.nan))
    except np.linalg.LinAlgError:
        return np.full(n, np.nan)


# ----------------------------------------------------------------------
# ARIMA(0,1,1): difference once, exact Gaussian MA(1) likelihood


@dataclass
class Ma1Fit:
    theta: float
    log_sigma: float  # log innovation standard deviation
    intercept: float
    loglik: float
    converged: bool
    at_boundary: bool
    stderr_theta: float  # asymptotic s.e. sqrt((1 - theta^2) / n)


def _ma1_profile_nll(theta: float, c_list, z_list) -> tuple[float, float]:
    """Profile negative log-likelihood over sigma^2 for MA(1) with mean c.

    Uses the innovations recursion; returns (nll, sigma2_hat).
    """
    ss = 0.0
    logw = 0.0
    n_total = 0
    th2 = theta * theta
    for c, z in zip(c_list, z_list):
        w = 1.0 + th2
        zhat = 0.0
        for t in range(z.shape[0]):
            u = (z[t] - c) - zhat
            ss += u * u / w
            logw += math.log(w)
            zhat = (theta / w) * u
            w = (1.0 + th2) - th2 / w
        n_total += z.shape[0]
    sigma2 = ss / n_total
    if sigma2 <= 0:
        return np.inf, 0.0
    nll = 0.5 * (n_total * (math.log(2.0 * math.pi * sigma2) + 1.0) + logw)
    return nll, sigma2


def _css_theta(c: float, z_list, theta: float) -> float:
    """Conditional sum of squares with e_0 = 0 (used for initialisation)."""
    total = 0.0
    for z in z_list:
        e = 0.0
        for t in range(z.shape[0]):
            e = (z[t] - c) - theta * e
            total += e * e
    return total


def fit_arima011(series) -> Ma1Fit:
    """Fit an ARIMA(0,1,1): first-difference, then MA(1) with intercept.

    Initialised by a conditional-sum-of-squares grid over theta, refined by
    exact Gaussian maximum likelihood (innovations form) with the
    invertibility constraint |theta| < 1 - 1e-6.  A list input is pooled
    with shared (theta, sigma); the intercept is also shared.
    """
    raw_list = _as_series_list(series)
    z_list = []
    for x in raw_list:
        if x.shape[0] < 50:
            raise DegenerateSeries("need at least 50 observations")
        z_list.append(np.diff(x))
    if all(float(np.var(z)) == 0.0 for z in z_list):
        raise DegenerateSeries("differences are constant; MA variance is zero")

    c0 = float(np.mean(np.concatenate(z_list)))
    grid = np.linspace(-0.9, 0.9, 13)
    css = [_css_theta(c0, z_list, th) for th in grid]
    th0 = float(grid[int(np.argmin(css))])

    bound = 1.0 - _MARGIN
    n_total_obs = sum(z.shape[0] for z in z_list)

    def nll_x(x):
        theta = bound * math.tanh(x[0])
        return _ma1_profile_nll(theta, [x[1]] * len(z_list), z_list)[0] / n_total_obs

    x0 = np.array([math.atanh(np.clip(th0 / bound, -0.999, 0.999)), c0])
    res = optimize.minimize(
        nll_x,
        x0,
        method="L-BFGS-B",
        options={"maxiter": _MAXITER, "gtol": _GTOL, "ftol": 1e-12},
    )
    theta = bound * math.tanh(res.x[0])
    intercept = float(res.x[1])
    _, sigma2 = _ma1_profile_nll(theta, [intercept] * len(z_list), z_list)
    if sigma2 <= 0:
        raise DegenerateSeries("innovation variance is zero")
    n_total = sum(z.shape[0] for z in z_list)
    return Ma1Fit(
        theta=float(theta),
        log_sigma=0.5 * math.log(sigma2),
        intercept=intercept,
        loglik=-float(res.fun) * n_total_obs,
        converged=bool(res.success),
        at_boundary=bool(abs(theta) > bound - 1e-4),
        stderr_theta=math.sqrt(max(1.0 - theta * theta, _MARGIN) / n_total),
    )


def fit_auxiliary(days) -> AuxCoefficients:
    """Pooled auxiliary fit over M realisations (shared coefficients).

    ``days`` is one AuxSeries / SimResult / snapshot series or a list of
    them; anything that is not already an AuxSeries goes through
    ``transform`` first.
    """
    if not isinstance(days, (list, tuple)):
        days = [days]
    if len(days) == 0:
        raise InvalidConfig("need at least one realisation")
    aux = [d if isinstance(d, AuxSeries) else transform(d) for d in days]
    g = fit_garch11([a.returns for a in aux])
    ma_bid = fit_arima011([a.vol_bid for a in aux])
    ma_ask = fit_arima011([a.vol_ask for a in aux])
    return AuxCoefficients(
        beta1=np.array([g.a0, g.a1, g.b1]),
        beta2=np.array([ma_bid.theta, ma_bid.log_sigma, ma_ask.theta, ma_ask.log_sigma]),
    )


# ----------------------------------------------------------------------
# diagnostics


def acf_pacf(series, max_lag: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample autocorrelations (lags 0..max_lag) and the PACF via
    Durbin-Levinson."""
    x = np.asarray(series, dtype=float).ravel()
    n = x.shape[0]
    if n <= max_lag + 1:
        raise DegenerateSeries("series too short for requested lags")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0:
        raise DegenerateSeries("series is constant")
    acf = np.empty(max_lag + 1)
    acf[0] = 1.0
    for k in range(1, max_lag + 1):
        acf[k] = float(xc[k:] @ xc[:-k]) / denom
    pacf = np.empty(max_lag + 1)
    pacf[0] = 1.0
    phi_prev = np.zeros(0)
    for k in range(1, max_lag + 1):
        if k == 1:
            phi_k = np.array([acf[1]])
        else:
            num = acf[k] - float(phi_prev @ acf[k - 1 : 0 : -1])
            den = 1.0 - float(phi_prev @ acf[1:k])
            alpha = num / den if den != 0.0 else 0.0
            phi_k = np.empty(k)
            phi_k[-1] = alpha
            phi_k[:-1] = phi_prev - alpha * phi_prev[::-1]
        pacf[k] = phi_k[-1]
        phi_prev = phi_k
    return acf, pacf


def arch_lm_test(returns, lags: int) -> tuple[float, float]:
    """Engle's LM test: regress squared returns on their first ``lags``
    lags; the statistic n*R^2 is chi-squared with ``lags`` degrees of
    freedom under the no-ARCH null."""
    r = np.asarray(returns, dtype=float).ravel()
    if r.shape[0] <= lags + 10:
        raise DegenerateSeries("series too short for ARCH-LM")
    r2 = r * r
    if float(np.var(r2)) == 0.0:
        raise DegenerateSeries("squared returns are constant")
    y = r2[lags:]
    n = y.shape[0]
    design = np.ones((n, lags + 1))
    for k in range(1, lags + 1):
        design[:, k] = r2[lags - k : -k]
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ coef
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_sq = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    statistic = n * r_sq
    p_value = float(stats.chi2.sf(statistic, lags))
    return float(statistic), p_value
