"""Multi-objective indirect inference.

The search couples a standard NSGA-II loop (fast non-dominated sorting,
crowding distance, binary tournament, simulated binary crossover and
polynomial mutation on the scalar parameters) with an adaptive
Inverse-Wishart mutation kernel that proposes the intensity covariance
matrix, so every candidate covariance stays symmetric positive-definite.
Objective vectors are squared-L2 gaps between auxiliary coefficients
fitted to observed data and to simulated data.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .agents import AgentParams, SimConfig, simulate
from .auxiliary import AuxCoefficients, fit_auxiliary, transform
from .errors import (
    InsufficientReplications,
    InvalidConfig,
    LengthMismatch,
    LobforgeError,
    NotPositiveDefinite,
)
from .stochastic import GammaMixtureSize, sample_inverse_wishart, spd_cholesky

__all__ = [
    "Bounds",
    "Individual",
    "Nsga2Config",
    "CalibrationReport",
    "LobObjective",
    "dominates",
    "non_dominated_sort",
    "crowding_distance",
    "sbx_crossover",
    "polynomial_mutation",
    "mutate_covariance",
    "compute_psi_n",
    "run_nsga2",
    "indirect_inference_single",
    "coverage_analysis",
    "make_agent_params",
]

PENALTY = 1.0e9

REFERENCE_NAMES = (
    "mu0_lo_passive",
    "mu0_lo_direct",
    "mu0_mo",
    "gamma0",
    "nu",
    "sigma_mo",
)


@dataclass(frozen=True)
class Bounds:
    """Box bounds for the scalar search parameters (lower < upper)."""

    names: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if len(self.names) != lo.shape[0] or lo.shape != hi.shape:
            raise InvalidConfig("bounds arrays must match the name list")
        if np.any(lo >= hi):
            raise InvalidConfig("each lower bound must be below its upper bound")

    @classmethod
    def from_dict(cls, d: dict[str, tuple[float, float]]) -> "Bounds":
        names = tuple(d.keys())
        lo = np.array([d[n][0] for n in names], dtype=float)
        hi = np.array([d[n][1] for n in names], dtype=float)
        return cls(names=names, lower=lo, upper=hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def sample_uniform(self, rng) -> np.ndarray:
        return self.lower + rng.random(self.dim) * (self.upper - self.lower)


@dataclass
class Individual:
    """One candidate: scalar vector, optional covariance, and evaluation."""

    x: np.ndarray
    sigma: np.ndarray | None = None
    objectives: np.ndarray | None = None
    rank: int = 0
    crowding: float = 0.0
    eval_seed: int = 0
    penalised: bool = False


def dominates(d1, d2) -> bool:
    """True iff d1 <= d2 elementwise with at least one strict inequality."""
    a = np.asarray(d1, dtype=float)
    b = np.asarray(d2, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"objective lengths differ: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def non_dominated_sort(objectives) -> np.ndarray:
    """Fast non-dominated sorting; returns 1-based front ranks."""
    objs = np.asarray(objectives, dtype=float)
    n = objs.shape[0]
    ranks = np.zeros(n, dtype=np.int64)
    dominated_by = [[] for _ in range(n)]
    dom_count = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(objs[i], objs[j]):
                dominated_by[i].append(j)
                dom_count[j] += 1
            elif dominates(objs[j], objs[i]):
                dominated_by[j].append(i)
                dom_count[i] += 1
    front = [i for i in range(n) if dom_count[i] == 0]
    r = 1
    while front:
        nxt = []
        for i in front:
            ranks[i] = r
            for j in dominated_by[i]:
                dom_count[j] -= 1
                if dom_count[j] == 0:
                    nxt.append(j)
        front = nxt
        r += 1
    return ranks


def crowding_distance(front_objectives) -> np.ndarray:
    """Per-objective normalised neighbour-gap sum; boundaries get +inf.

    An objective with zero range contributes nothing to interior points.
    """
    objs = np.asarray(front_objectives, dtype=float)
    n = objs.shape[0]
    if n == 0:
        return np.zeros(0)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(objs.shape[1]):
        order = np.argsort(objs[:, k], kind="stable")
        lo, hi = objs[order[0], k], objs[order[-1], k]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = hi - lo
        if span <= 0:
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            if not np.isinf(dist[i]):
                dist[i] += (objs[order[pos + 1], k] - objs[order[pos - 1], k]) / span
    return dist


def sbx_crossover(x1, x2, bounds: Bounds, eta_c: float = 5.0, p_c: float = 0.7, rng=None):
    """Simulated binary crossover, applied per element with probability p_c.

    The spread factor is drawn from the density with mass 1/2 on (0, 1]
    and 1/2 on (1, inf); children are clamped into the bounds.
    """
    c1 = np.array(x1, dtype=float)
    c2 = np.array(x2, dtype=float)
    for k in range(c1.shape[0]):
        if rng.random() >= p_c:
            continue
        u = rng.random()
        if u < 0.5:
            alpha = (2.0 * u) ** (1.0 / (eta_c + 1.0))
        else:
            alpha = (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta_c + 1.0))
        a, b = c1[k], c2[k]
        c1[k] = 0.5 * ((1.0 - alpha) * a + (1.0 + alpha) * b)
        c2[k] = 0.5 * ((1.0 + alpha) * a + (1.0 - alpha) * b)
    np.clip(c1, bounds.lower, bounds.upper, out=c1)
    np.clip(c2, bounds.lower, bounds.upper, out=c2)
    return c1, c2


def polynomial_mutation(x, bounds: Bounds, eta_m: float = 10.0, p_m: float = 0.2, rng=None):
    """Polynomial mutation, applied per element with probability p_m."""
    out = np.array(x, dtype=float)
    for k in range(out.shape[0]):
        if rng.random() >= p_m:
            continue
        g = rng.random()
        if g < 0.5:
            delta = (2.0 * g) ** (1.0 / (eta_m + 1.0)) - 1.0
        else:
            delta = 1.0 - (2.0 * (1.0 - g)) ** (1.0 / (eta_m + 1.0))
        out[k] = out[k] + delta * (bounds.upper[k] - bounds.lower[k])
    np.clip(out, bounds.lower, bounds.upper, out=out)
    return out


def compute_psi_n(history, w: float = 0.9, recency: bool = True) -> np.ndarray | None:
    """Generation- and inverse-rank-weighted average of accepted covariances.

    ``history`` is a list (one entry per generation) of lists of
    ``(sigma, rank)`` pairs for the individuals selected as parents.  With
    ``recency`` generation t gets weight w**(n-t) (recent generations count
    most); without it the literal w**t weighting is used.  Returns None for
    empty history.
    """
    if not history:
        return None
    n = len(history)
    num = None
    den = 0.0
    for t, gen in enumerate(history, start=1):
        if not gen:
            continue
        wt = w ** (n - t) if recency else w**t
        inv_rank = np.array([1.0 / r for _, r in gen])
        stack = np.stack([s for s, _ in gen])
        mean_t = np.tensordot(inv_rank, stack, axes=1) / inv_rank.sum()
        num = wt * mean_t if num is None else num + wt * mean_t
        den += wt
    if num is None:
        return None
    return num / den


def mutate_covariance(
    history,
    psi_prior: np.ndarray,
    p1: float,
    p2: float,
    w1: float,
    w: float,
    rng,
    recency: bool = True,
) -> np.ndarray:
    """Draw a covariance proposal from the two-component IW mixture.

    With probability 1 - w1 the local component IW(Psi_n, p1) is used,
    where Psi_n is the weighted history average (the prior before any
    history exists); otherwise the diffuse component IW(psi_prior, p2).
    The component choice consumes one uniform before the IW draw.
    """
    psi_prior = np.asarray(psi_prior, dtype=float)
    spd_cholesky(psi_prior)
    psi_n = compute_psi_n(history, w=w, recency=recency)
    if psi_n is None:
        psi_n = psi_prior
    if rng.random() < w1:
        return sample_inverse_wishart(psi_prior, p2, rng)
    return sample_inverse_wishart(psi_n, p1, rng)


# ----------------------------------------------------------------------
# theta construction and the simulation-backed objective


def make_agent_params(
    names: tuple[str, ...],
    x: np.ndarray,
    sigma: np.ndarray | None,
    base: AgentParams,
) -> AgentParams:
    """Build AgentParams from named scalars plus an optional covariance.

    Recognised names: the six reference scalars, ``gamma_mo``, per-level
    skews ``gamma_lo_s<S>`` (S the relative level), and the order-size
    mixture parameters ``size_w``, ``size_theta1``, ``size_theta2`` (shapes
    fixed at 1 and 2).  Unnamed fields come from ``base``.
    """
    vals = dict(zip(names, (float(v) for v in x)))
    l_t = base.l_t
    gamma0 = vals.get("gamma0")
    skew = base.skew_lo.copy()
    if gamma0 is not None:
        skew[:] = gamma0
    for i, s in enumerate(range(-base.l_d + 1, base.l_p + 1)):
        key = f"gamma_lo_s{s}"
        if key in vals:
            skew[i] = vals[key]
    skew_mo = vals.get("gamma_mo", gamma0 if gamma0 is not None else base.skew_mo)
    size_model = base.order_size_model
    if "size_w" in vals or "size_theta1" in vals or "size_theta2" in vals:
        size_model = GammaMixtureSize(
            w=vals.get("size_w", 0.5),
            kappa1=1.0,
            theta1=vals.get("size_theta1", 1.0),
            kappa2=2.0,
            theta2=vals.get("size_theta2", 1.0),
        )
    return replace(
        base,
        mu0_lo_passive=vals.get("mu0_lo_passive", base.mu0_lo_passive),
        mu0_lo_direct=vals.get("mu0_lo_direct", base.mu0_lo_direct),
        mu0_mo=vals.get("mu0_mo", base.mu0_mo),
        skew_lo=skew,
        skew_mo=skew_mo,
        nu=vals.get("nu", base.nu),
        sigma_mo=vals.get("sigma_mo", base.sigma_mo),
        Sigma=sigma if sigma is not None else base.Sigma,
        order_size_model=size_model,
        mu0_c_passive=None,
        mu0_c_direct=None,
    )


def l2_gap(fitted: np.ndarray, target: np.ndarray) -> float:
    """Squared L2 distance between two coefficient vectors."""
    fitted = np.asarray(fitted, dtype=float)
    target = np.asarray(target, dtype=float)
    if fitted.shape != target.shape:
        raise LengthMismatch("coefficient vectors differ in length")
    return float(np.sum((fitted - target) ** 2))


def _eval_seeds(eval_seed: int, m: int) -> list[int]:
    state = np.random.SeedSequence(eval_seed).generate_state(m, dtype=np.uint64)
    return [int(s) for s in state]


@dataclass(frozen=True)
class LobObjective:
    """Simulation-backed objective: simulate M days, fit pooled auxiliary
    models, return the squared-L2 gaps for the price and volume
    coefficient vectors.  Failures (degenerate days or fits) map to the
    large finite penalty.  Deterministic given (x, sigma, eval_seed);
    picklable so population evaluation can use a process pool."""

    target: AuxCoefficients
    base: AgentParams
    sim_config: SimConfig
    names: tuple[str, ...]
    M: int = 1

    def aux_coefficients(self, x, sigma, eval_seed: int) -> AuxCoefficients | None:
        """Pooled fitted coefficients for the candidate, None on failure."""
        try:
            theta = make_agent_params(self.names, x, sigma, self.base)
        except (InvalidConfig, NotPositiveDefinite, ValueError):
            return None
        days = []
        for seed in _eval_seeds(eval_seed, self.M):
            cfg = replace(self.sim_config, seed=seed, keep_activity=False)
            try:
                days.append(transform(simulate(theta, cfg)))
            except LobforgeError:
                return None
        try:
            return fit_auxiliary(days)
        except LobforgeError:
            return None

    def __call__(self, x, sigma, eval_seed: int) -> np.ndarray:
        coeffs = self.aux_coefficients(x, sigma, eval_seed)
        if coeffs is None:
            return np.array([PENALTY, PENALTY])
        return np.array(
            [
                l2_gap(coeffs.beta1, self.target.beta1),
                l2_gap(coeffs.beta2, self.target.beta2),
            ]
        )


def objective_vector(
    theta_x: np.ndarray,
    sigma: np.ndarray | None,
    target: AuxCoefficients,
    base: AgentParams,
    sim_config: SimConfig,
    names: tuple[str, ...] = REFERENCE_NAMES,
    M: int = 1,
    eval_seed: int = 0,
) -> np.ndarray:
    """Convenience wrapper over LobObjective for one candidate."""
    obj = LobObjective(target=target, base=base, sim_config=sim_config, names=names, M=M)
    return obj(theta_x, sigma, eval_seed)


# ----------------------------------------------------------------------
# NSGA-II search


@dataclass(frozen=True)
class Nsga2Config:
    """Search settings; the defaults follow the evolutionary setup used
    throughout (population 40, 40 generations, SBX eta 5 at rate 0.7,
    polynomial mutation eta 10 at rate 0.2)."""

    pop_size: int = 40
    generations: int = 40
    seed: int = 0
    eta_c: float = 5.0
    p_c: float = 0.7
    eta_m: float = 10.0
    p_m: float = 0.2
    with_covariance: bool = True
    sigma_dim: int = 8
    psi_scale: float = 0.5
    w1: float = 0.1
    p1: float | None = None  # default d + 10
    p2: float | None = None  # default d + 2
    kernel_w: float = 0.9
    kernel_recency: bool = True
    jobs: int = 1
    track_population: bool = False

    def kernel_dofs(self) -> tuple[float, float]:
        d = self.sigma_dim
        return (
            self.p1 if self.p1 is not None else d + 10.0,
            self.p2 if self.p2 is not None else d + 2.0,
        )


@dataclass
class CalibrationReport:
    """Final population, Pareto front, and per-generation traces."""

    population: list[Individual]
    front: list[Individual]
    objective_trace: list[np.ndarray]
    rank_trace: list[np.ndarray]
    psi_trace: list[np.ndarray | None]
    names: tuple[str, ...]
    config: Nsga2Config
    populations: list[list[Individual]] | None = None

    def front_table(self) -> list[dict]:
        rows = []
        for ind in self.front:
            row = {n: float(v) for n, v in zip(self.names, ind.x)}
            row["tr_sigma"] = (
                float(np.trace(ind.sigma)) if ind.sigma is not None else float("nan")
            )
            row["d1"] = float(ind.objectives[0])
            row["d2"] = float(ind.objectives[1])
            row["rank"] = int(ind.rank)
            rows.append(row)
        return rows


def _rank_and_crowd(population: list[Individual]) -> None:
    objs = np.stack([ind.objectives for ind in population])
    ranks = non_dominated_sort(objs)
    for ind, r in zip(population, ranks):
        ind.rank = int(r)
    for r in np.unique(ranks):
        idx = np.nonzero(ranks == r)[0]
        dist = crowding_distance(objs[idx])
        for i, d in zip(idx, dist):
            population[i].crowding = float(d)


def _crowded_better(a: Individual, b: Individual) -> bool:
    if a.rank != b.rank:
        return a.rank < b.rank
    return a.crowding > b.crowding


def _tournament(population: list[Individual], rng) -> Individual:
    i = int(rng.integers(len(population)))
    j = int(rng.integers(len(population)))
    return population[i] if _crowded_better(population[i], population[j]) else population[j]


def _evaluate_all(evaluate, pending: list[Individual], eval_seed: int, jobs: int) -> None:
    for ind in pending:
        ind.eval_seed = eval_seed
    if jobs > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(evaluate, ind.x, ind.sigma, ind.eval_seed) for ind in pending
            ]
            for ind, fut in zip(pending, futures):
                ind.objectives = np.asarray(fut.result(), dtype=float)
    else:
        for ind in pending:
            ind.objectives = np.asarray(evaluate(ind.x, ind.sigma, ind.eval_seed), dtype=float)
    for ind in pending:
        ind.penalised = bool(np.any(ind.objectives >= PENALTY))


def run_nsga2(evaluate, bounds: Bounds, config: Nsga2Config) -> CalibrationReport:
    """Elitist NSGA-II over the box-bounded scalars (and, when enabled, the
    covariance matrix via the adaptive Inverse-Wishart kernel).

    ``evaluate(x, sigma, eval_seed) -> objective vector`` must be pure; a
    common evaluation seed is shared by all individuals of a generation
    (common random numbers) and refreshed every generation.
    """
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    p1, p2 = config.kernel_dofs()
    psi_prior = config.psi_scale * np.eye(config.sigma_dim)
    history: list[list[tuple[np.ndarray, int]]] = []

    def new_sigma():
        if not config.with_covariance:
            return None
        return mutate_covariance(
            history,
            psi_prior,
            p1,
            p2,
            config.w1,
            config.kernel_w,
            rng,
            recency=config.kernel_recency,
        )

    population = [
        Individual(x=bounds.sample_uniform(rng), sigma=new_sigma())
        for _ in range(config.pop_size)
    ]
    seed_stream = np.random.SeedSequence(config.seed ^ 0x5EED)
    eval_seeds = [int(s) for s in seed_stream.generate_state(config.generations + 1, dtype=np.uint64)]
    _evaluate_all(evaluate, population, eval_seeds[0], config.jobs)
    _rank_and_crowd(population)

    objective_trace = [np.stack([ind.objectives for ind in population])]
    rank_trace = [np.array([ind.rank for ind in population])]
    psi_trace: list[np.ndarray | None] = [None]
    populations = [list(population)] if config.track_population else None

    if config.with_covariance:
        history.append([(ind.sigma, ind.rank) for ind in population])

    for gen in range(1, config.generations + 1):
        offspring: list[Individual] = []
        while len(offspring) < config.pop_size:
            pa = _tournament(population, rng)
            pb = _tournament(population, rng)
            c1, c2 = sbx_crossover(pa.x, pb.x, bounds, config.eta_c, config.p_c, rng)
            for cx in (c1, c2):
                if len(offspring) >= config.pop_size:
                    break
                x = polynomial_mutation(cx, bounds, config.eta_m, config.p_m, rng)
                offspring.append(Individual(x=x, sigma=new_sigma()))
        _evaluate_all(evaluate, offspring, eval_seeds[gen], config.jobs)
        combined = population + offspring
        _rank_and_crowd(combined)
        combined.sort(key=lambda ind: (ind.rank, -ind.crowding))
        population = combined[: config.pop_size]
        _rank_and_crowd(population)

        objective_trace.append(np.stack([ind.objectives for ind in population]))
        rank_trace.append(np.array([ind.rank for ind in population]))
        psi_trace.append(compute_psi_n(history, config.kernel_w, config.kernel_recency))
        if populations is not None:
            populations.append(list(population))
        if config.with_covariance:
            history.append([(ind.sigma, ind.rank) for ind in population])

    front = [ind for ind in population if ind.rank == 1]
    return CalibrationReport(
        population=population,
        front=front,
        objective_trace=objective_trace,
        rank_trace=rank_trace,
        psi_trace=psi_trace,
        names=bounds.names,
        config=config,
        populations=populations,
    )


# ----------------------------------------------------------------------
# single-objective indirect inference


@dataclass
class SingleIIResult:
    best_x: np.ndarray
    best_sigma: np.ndarray | None
    best_distance: float
    distance_trace: np.ndarray


def indirect_inference_single(
    coeff_fn,
    bounds: Bounds,
    iterations: int,
    seed: int = 0,
    target: AuxCoefficients | None = None,
    weight_matrix: np.ndarray | None = None,
    with_covariance: bool = False,
    sigma_dim: int = 8,
    psi_scale: float = 0.5,
    p1: float | None = None,
) -> SingleIIResult:
    """Keep-best random-search indirect inference on the concatenated
    auxiliary vector.

    ``coeff_fn(x, sigma, eval_seed)`` returns either an AuxCoefficients,
    a raw coefficient vector, or None (penalised).  The distance is
    Euclidean by default or Mahalanobis under a user-supplied positive
    definite weight matrix.  The distance trace is monotone non-increasing
    by construction.
    """
    if iterations < 1:
        raise InvalidConfig("need at least one iteration")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    target_vec = target.concatenated() if target is not None else None
    if weight_matrix is not None:
        weight_matrix = np.asarray(weight_matrix, dtype=float)
        spd_cholesky(weight_matrix)
    dof = p1 if p1 is not None else sigma_dim + 10.0
    psi_prior = psi_scale * np.eye(sigma_dim)

    def distance(x, sigma, eval_seed):
        got = coeff_fn(x, sigma, eval_seed)
        if got is None:
            return math.sqrt(2.0) * PENALTY
        vec = got.concatenated() if isinstance(got, AuxCoefficients) else np.asarray(got, float)
        diff = vec - target_vec if target_vec is not None else vec
        if weight_matrix is None:
            return float(np.sqrt(diff @ diff))
        return float(np.sqrt(diff @ weight_matrix @ diff))

    best_x = None
    best_sigma = None
    best_d = np.inf
    trace = np.empty(iterations)
    for j in range(iterations):
        x = bounds.sample_uniform(rng)
        sigma = (
            sample_inverse_wishart(psi_prior, dof, rng) if with_covariance else None
        )
        d = distance(x, sigma, j)
        if d < best_d:
            best_d = d
            best_x = x
            best_sigma = sigma
        trace[j] = best_d
    return SingleIIResult(
        best_x=best_x, best_sigma=best_sigma, best_distance=best_d, distance_trace=trace
    )


# ----------------------------------------------------------------------
# empirical confidence-interval coverage of the front


@dataclass
class CoverageReport:
    """Per-solution, per-coefficient 95%-interval indicators plus the
    front-wide proportion per coefficient."""

    names: tuple[str, ...]
    covered: np.ndarray  # bool, (n_solutions, n_coefficients)
    proportions: np.ndarray  # (n_coefficients,)
    intervals: np.ndarray  # (n_solutions, n_coefficients, 2)
    excluded: np.ndarray  # per solution: failed replication count


def coverage_analysis(
    front_thetas: list[AgentParams],
    target: AuxCoefficients,
    sim_config: SimConfig,
    n_rep: int = 50,
    level: float = 0.95,
    seed: int = 0,
) -> CoverageReport:
    """Re-simulate each front solution n_rep times, fit the auxiliary
    models per realisation, and test whether the observed-data coefficient
    lies inside the central ``level`` empirical interval."""
    if n_rep < 20:
        raise InsufficientReplications("coverage analysis needs n_rep >= 20")
    if not front_thetas:
        raise InvalidConfig("front is empty")
    names = AuxCoefficients.coefficient_names()
    n_coef = len(names)
    target_vec = target.concatenated()
    covered = np.zeros((len(front_thetas), n_coef), dtype=bool)
    intervals = np.zeros((len(front_thetas), n_coef, 2))
    excluded = np.zeros(len(front_thetas), dtype=np.int64)
    lo_q = 0.5 * (1.0 - level)
    hi_q = 1.0 - lo_q
    for si, theta in enumerate(front_thetas):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(si,))
        seeds = ss.generate_state(n_rep, dtype=np.uint64)
        rows = []
        for rep_seed in seeds:
            cfg = replace(sim_config, seed=int(rep_seed), keep_activity=False)
            try:
                day = transform(simulate(theta, cfg))
                g = fit_auxiliary([day])
                rows.append(g.concatenated())
            except LobforgeError:
                excluded[si] += 1
        if not rows:
            continue
        mat = np.stack(rows)
        lo = np.quantile(mat, lo_q, axis=0)
        hi = np.quantile(mat, hi_q, axis=0)
        intervals[si, :, 0] = lo
        intervals[si, :, 1] = hi
        covered[si] = (target_vec >= lo) & (target_vec <= hi)
    proportions = covered.mean(axis=0)
    return CoverageReport(
        names=names,
        covered=covered,
        proportions=proportions,
        intervals=intervals,
        excluded=excluded,
    )
