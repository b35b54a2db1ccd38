"""The per-interval generative loop composing both representative agents'
activity, the quote-to-trade overlay, and the reference-model
parameterisation.

One simulated interval draws, in a fixed order: the ask then bid limit-order
intensity vectors (multivariate skew-t, transformed by the normal CDF and
per-level baselines) and counts; the ask then bid cancellation intensities
and truncated counts (bounded by interval-start resting orders plus
arrivals); then each side's market-order intensity and truncated count
(bounded by the opposite side's passive resting-order total after
cancellations).  The update map then applies all events in the fixed book
order (passive, aggressive, cancel, market).  Everything is integer tick /
share arithmetic downstream of the sampled counts, so a run is fully
deterministic given its seed, on either backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from . import backend
from ._pykernel import ASK, BID
from .book import BookState, IntervalActivity, Order, SideActivity
from .errors import CrossedSpec, InvalidConfig, InvalidRatio
from .stochastic import (
    ConstantSize,
    OrderSizeModel,
    mean_order_size,
    sample_order_sizes,
    sample_truncated_poisson,
    spd_cholesky,
)

__all__ = [
    "AgentParams",
    "SimConfig",
    "InitialBookSpec",
    "SnapshotSeries",
    "SimResult",
    "simulate",
    "apply_quote_to_trade",
    "seed_initial_book",
]


@dataclass(frozen=True)
class AgentParams:
    """All liquidity-provider and liquidity-demander parameters.

    Baselines are events per interval.  ``skew_lo`` has one entry per
    modelled level (ascending relative level); the reference model uses a
    common value everywhere.  ``sigma_mo`` is the scale (standard
    deviation) of the univariate market-order skew-t.  Cancellation
    baselines default to the submission baselines (the reference-model
    constraint); the quote-to-trade overlay rescales them.
    """

    mu0_lo_passive: float
    mu0_lo_direct: float
    mu0_mo: float
    skew_lo: np.ndarray
    skew_mo: float
    nu: float
    sigma_mo: float
    Sigma: np.ndarray
    l_p: int = 5
    l_d: int = 3
    m_lo: np.ndarray | None = None
    mu0_c_passive: float | None = None
    mu0_c_direct: float | None = None
    order_size_model: OrderSizeModel = ConstantSize(1)

    def __post_init__(self):
        l_t = self.l_p + self.l_d
        skew = np.asarray(self.skew_lo, dtype=float)
        if skew.ndim == 0:
            skew = np.full(l_t, float(skew))
        object.__setattr__(self, "skew_lo", skew)
        m = self.m_lo
        m = np.zeros(l_t) if m is None else np.asarray(m, dtype=float)
        object.__setattr__(self, "m_lo", m)
        object.__setattr__(self, "Sigma", np.asarray(self.Sigma, dtype=float))
        if min(self.mu0_lo_passive, self.mu0_lo_direct, self.mu0_mo) <= 0:
            raise InvalidConfig("baseline intensities must be positive")
        if self.nu <= 0 or self.sigma_mo <= 0:
            raise InvalidConfig("nu and sigma_mo must be positive")
        if self.l_p < 1 or self.l_d < 1:
            raise InvalidConfig("l_p and l_d must be positive")
        if skew.shape != (l_t,) or m.shape != (l_t,):
            raise InvalidConfig("skew_lo and m_lo must have length l_t")
        if self.Sigma.shape != (l_t, l_t):
            raise InvalidConfig("Sigma must be l_t x l_t")
        spd_cholesky(self.Sigma)
        for v in (self.mu0_c_passive, self.mu0_c_direct):
            if v is not None and v <= 0:
                raise InvalidConfig("cancellation baselines must be positive")

    @property
    def l_t(self) -> int:
        return self.l_p + self.l_d

    @property
    def cancel_passive(self) -> float:
        return self.mu0_c_passive if self.mu0_c_passive is not None else self.mu0_lo_passive

    @property
    def cancel_direct(self) -> float:
        return self.mu0_c_direct if self.mu0_c_direct is not None else self.mu0_lo_direct

    @classmethod
    def reference(
        cls,
        mu0_lo_passive: float,
        mu0_lo_direct: float,
        mu0_mo: float,
        gamma0: float,
        nu: float,
        sigma_mo: float,
        Sigma: np.ndarray,
        order_size_model: OrderSizeModel = ConstantSize(1),
        l_p: int = 5,
        l_d: int = 3,
    ) -> "AgentParams":
        """Reference-model constraints: bid/ask share parameters, zero
        locations, one common skew for every level and the market orders,
        cancellation baselines equal to submission baselines."""
        l_t = l_p + l_d
        return cls(
            mu0_lo_passive=mu0_lo_passive,
            mu0_lo_direct=mu0_lo_direct,
            mu0_mo=mu0_mo,
            skew_lo=np.full(l_t, gamma0),
            skew_mo=gamma0,
            nu=nu,
            sigma_mo=sigma_mo,
            Sigma=Sigma,
            l_p=l_p,
            l_d=l_d,
            order_size_model=order_size_model,
        )

    def to_json_dict(self) -> dict:
        d = {
            "mu0_lo_passive": self.mu0_lo_passive,
            "mu0_lo_direct": self.mu0_lo_direct,
            "mu0_mo": self.mu0_mo,
            "skew_lo": self.skew_lo.tolist(),
            "skew_mo": self.skew_mo,
            "nu": self.nu,
            "sigma_mo": self.sigma_mo,
            "Sigma": self.Sigma.tolist(),
            "l_p": self.l_p,
            "l_d": self.l_d,
            "m_lo": self.m_lo.tolist(),
            "mu0_c_passive": self.mu0_c_passive,
            "mu0_c_direct": self.mu0_c_direct,
        }
        m = self.order_size_model
        if isinstance(m, ConstantSize):
            d["order_size_model"] = {"kind": "constant", "c": m.c}
        else:
            d["order_size_model"] = {
                "kind": "gamma_mixture",
                "w": m.w,
                "kappa1": m.kappa1,
                "theta1": m.theta1,
                "kappa2": m.kappa2,
                "theta2": m.theta2,
            }
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "AgentParams":
        from .stochastic import GammaMixtureSize

        size = d.get("order_size_model", {"kind": "constant", "c": 1})
        if size["kind"] == "constant":
            model: OrderSizeModel = ConstantSize(int(size["c"]))
        elif size["kind"] == "gamma_mixture":
            model = GammaMixtureSize(
                w=size["w"],
                kappa1=size["kappa1"],
                theta1=size["theta1"],
                kappa2=size["kappa2"],
                theta2=size["theta2"],
            )
        else:
            raise InvalidConfig(f"unknown order size model {size['kind']!r}")
        return cls(
            mu0_lo_passive=d["mu0_lo_passive"],
            mu0_lo_direct=d["mu0_lo_direct"],
            mu0_mo=d["mu0_mo"],
            skew_lo=np.asarray(d["skew_lo"], dtype=float),
            skew_mo=d["skew_mo"],
            nu=d["nu"],
            sigma_mo=d["sigma_mo"],
            Sigma=np.asarray(d["Sigma"], dtype=float),
            l_p=int(d.get("l_p", 5)),
            l_d=int(d.get("l_d", 3)),
            m_lo=np.asarray(d["m_lo"], dtype=float) if d.get("m_lo") is not None else None,
            mu0_c_passive=d.get("mu0_c_passive"),
            mu0_c_direct=d.get("mu0_c_direct"),
            order_size_model=model,
        )


@dataclass(frozen=True)
class InitialBookSpec:
    """Initial resting liquidity: best bid/ask ticks plus per-level orders.

    Either a uniform fill (``orders_per_level`` orders of ``order_size``
    shares at each of ``n_levels`` passive levels per side) or explicit
    per-level size lists (outer index is the passive level s = 1.., inner
    the FIFO order).
    """

    best_bid: int = 10000
    best_ask: int = 10002
    n_levels: int = 5
    orders_per_level: int = 10
    order_size: int | None = None
    bid_levels: tuple[tuple[int, ...], ...] | None = None
    ask_levels: tuple[tuple[int, ...], ...] | None = None


@dataclass(frozen=True)
class SimConfig:
    """Simulation run settings."""

    T: int = 3060
    interval_seconds: int = 10
    seed: int = 0
    initial_book: InitialBookSpec | None = None
    quote_to_trade_ratio: float | None = None
    tick_size: float = 0.01
    keep_activity: bool = True
    backend_kind: str | None = None

    def __post_init__(self):
        if self.T < 1:
            raise InvalidConfig("T must be >= 1")
        if self.interval_seconds < 1:
            raise InvalidConfig("interval_seconds must be >= 1")
        if self.quote_to_trade_ratio is not None and self.quote_to_trade_ratio <= 1:
            raise InvalidRatio("quote-to-trade ratio must be > 1")

    def to_json_dict(self) -> dict:
        d = {
            "T": self.T,
            "interval_seconds": self.interval_seconds,
            "seed": self.seed,
            "quote_to_trade_ratio": self.quote_to_trade_ratio,
            "tick_size": self.tick_size,
        }
        if self.initial_book is not None:
            b = self.initial_book
            d["initial_book"] = {
                "best_bid": b.best_bid,
                "best_ask": b.best_ask,
                "n_levels": b.n_levels,
                "orders_per_level": b.orders_per_level,
                "order_size": b.order_size,
                "bid_levels": b.bid_levels,
                "ask_levels": b.ask_levels,
            }
        else:
            d["initial_book"] = None
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "SimConfig":
        book = d.get("initial_book")
        spec = None
        if book is not None:
            spec = InitialBookSpec(
                best_bid=int(book["best_bid"]),
                best_ask=int(book["best_ask"]),
                n_levels=int(book.get("n_levels", 5)),
                orders_per_level=int(book.get("orders_per_level", 10)),
                order_size=book.get("order_size"),
                bid_levels=_freeze(book.get("bid_levels")),
                ask_levels=_freeze(book.get("ask_levels")),
            )
        return cls(
            T=int(d.get("T", 3060)),
            interval_seconds=int(d.get("interval_seconds", 10)),
            seed=int(d.get("seed", 0)),
            initial_book=spec,
            quote_to_trade_ratio=d.get("quote_to_trade_ratio"),
            tick_size=float(d.get("tick_size", 0.01)),
        )


def _freeze(levels):
    if levels is None:
        return None
    return tuple(tuple(int(x) for x in lvl) for lvl in levels)


@dataclass
class SnapshotSeries:
    """Interval-boundary book summaries: bests, reference prices, window
    order counts and share volumes per level, and aggregate exterior
    volume.  A missing side is recorded with best = -1."""

    interval_seconds: int
    l_p: int
    l_d: int
    best_bid: np.ndarray
    best_ask: np.ndarray
    ref_bid: np.ndarray
    ref_ask: np.ndarray
    bid_counts: np.ndarray
    ask_counts: np.ndarray
    bid_shares: np.ndarray
    ask_shares: np.ndarray
    bid_exterior_shares: np.ndarray
    ask_exterior_shares: np.ndarray

    @property
    def n_snapshots(self) -> int:
        return len(self.best_bid)

    @property
    def l_t(self) -> int:
        return self.l_p + self.l_d

    def mid_price_ticks(self, index: int) -> float:
        bb, ba = int(self.best_bid[index]), int(self.best_ask[index])
        if bb < 0 or ba < 0:
            raise InvalidConfig("mid price undefined: one-sided book")
        return 0.5 * (bb + ba)


@dataclass
class SimResult:
    """A full simulated trading day: snapshots, the sampled activity log,
    and realised per-level event statistics."""

    theta: AgentParams
    config: SimConfig
    snapshots: SnapshotSeries
    activities: list[IntervalActivity] | None
    realised: dict[str, np.ndarray]

    @property
    def T(self) -> int:
        return self.config.T

    def realised_totals(self) -> dict[str, int]:
        r = self.realised
        return {
            "lo_count": int(r["lo_counts"].sum()),
            "cancel_count": int(r["cancelled_counts"].sum()),
            "mo_count": int(r["mo_counts"].sum()),
            "mo_executed_shares": int(r["mo_exec_shares"].sum()),
            "mo_discarded_shares": int(r["mo_discard_shares"].sum()),
        }


def apply_quote_to_trade(theta: AgentParams, q: float) -> AgentParams:
    """Scale cancellation baselines to (1 - 1/q) times the submission
    baselines; everything else unchanged."""
    if q <= 1:
        raise InvalidRatio(f"quote-to-trade ratio must be > 1, got {q}")
    factor = 1.0 - 1.0 / q
    return replace(
        theta,
        mu0_c_passive=factor * theta.mu0_lo_passive,
        mu0_c_direct=factor * theta.mu0_lo_direct,
    )


def seed_initial_book(spec: InitialBookSpec, tick_size: float = 0.01) -> BookState:
    """Build the initial book state from a specification.

    Sequence numbers are assigned in level-then-side order (level 1 bid,
    level 1 ask, level 2 bid, ...), oldest first within a level.
    """
    if spec.best_bid >= spec.best_ask:
        raise CrossedSpec(
            f"initial best bid {spec.best_bid} >= best ask {spec.best_ask}"
        )
    if spec.order_size is not None and spec.order_size < 1:
        raise InvalidConfig("initial order size must be >= 1")
    size = spec.order_size if spec.order_size is not None else 1
    bid_levels = spec.bid_levels
    ask_levels = spec.ask_levels
    n_levels = spec.n_levels
    if bid_levels is not None or ask_levels is not None:
        if bid_levels is None or ask_levels is None or len(bid_levels) != len(ask_levels):
            raise InvalidConfig("explicit ladders must be given for both sides")
        n_levels = len(bid_levels)
    bids: dict[int, tuple[Order, ...]] = {}
    asks: dict[int, tuple[Order, ...]] = {}
    seq = 0
    for lvl in range(n_levels):
        bid_sizes = (
            bid_levels[lvl] if bid_levels is not None else (size,) * spec.orders_per_level
        )
        ask_sizes = (
            ask_levels[lvl] if ask_levels is not None else (size,) * spec.orders_per_level
        )
        btick = spec.best_bid - lvl
        atick = spec.best_ask + lvl
        border = []
        for s in bid_sizes:
            border.append(Order(int(s), seq))
            seq += 1
        aorder = []
        for s in ask_sizes:
            aorder.append(Order(int(s), seq))
            seq += 1
        if border:
            bids[btick] = tuple(border)
        if aorder:
            asks[atick] = tuple(aorder)
    return BookState(bids=bids, asks=asks, tick_size=tick_size)


def _resolved_initial_spec(theta: AgentParams, config: SimConfig) -> InitialBookSpec:
    spec = config.initial_book or InitialBookSpec()
    if spec.order_size is None:
        spec = replace(spec, order_size=mean_order_size(theta.order_size_model))
    return spec


def simulate(theta: AgentParams, config: SimConfig) -> SimResult:
    """Run one simulated trading day of T intervals.

    Reference prices are the bests at each interval boundary; if a side
    empties, its previous reference price is retained.  Cancellation counts
    are sampled against interval-start resting orders plus arrivals, and
    clamped at application time to what actually rests (arrivals that
    executed immediately cannot be cancelled); realised statistics record
    what was applied.
    """
    if config.quote_to_trade_ratio is not None:
        theta_eff = apply_quote_to_trade(theta, config.quote_to_trade_ratio)
    else:
        theta_eff = theta

    l_p, l_d, l_t = theta_eff.l_p, theta_eff.l_d, theta_eff.l_t
    T = config.T
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    chol = spd_cholesky(theta_eff.Sigma)
    s_values = np.arange(-l_d + 1, l_p + 1)
    passive = s_values >= 1
    mu0_lo = np.where(passive, theta_eff.mu0_lo_passive, theta_eff.mu0_lo_direct)
    mu0_c = np.where(passive, theta_eff.cancel_passive, theta_eff.cancel_direct)
    size_model = theta_eff.order_size_model

    passive_idx = np.nonzero(passive)[0]
    book0 = seed_initial_book(_resolved_initial_spec(theta_eff, config), config.tick_size)
    eng = backend.make_engine(config.backend_kind)
    seq = 0
    for side, ladder in ((BID, book0.bids), (ASK, book0.asks)):
        for tick in sorted(ladder):
            for o in ladder[tick]:
                eng.add_resting(side, int(tick), o.size, o.seq)
                seq = max(seq, o.seq + 1)

    snap = SnapshotSeries(
        interval_seconds=config.interval_seconds,
        l_p=l_p,
        l_d=l_d,
        best_bid=np.zeros(T + 1, dtype=np.int64),
        best_ask=np.zeros(T + 1, dtype=np.int64),
        ref_bid=np.zeros(T + 1, dtype=np.int64),
        ref_ask=np.zeros(T + 1, dtype=np.int64),
        bid_counts=np.zeros((T + 1, l_t), dtype=np.int64),
        ask_counts=np.zeros((T + 1, l_t), dtype=np.int64),
        bid_shares=np.zeros((T + 1, l_t), dtype=np.int64),
        ask_shares=np.zeros((T + 1, l_t), dtype=np.int64),
        bid_exterior_shares=np.zeros(T + 1, dtype=np.int64),
        ask_exterior_shares=np.zeros(T + 1, dtype=np.int64),
    )
    realised = {
        "lo_counts": np.zeros((T, 2), dtype=np.int64),
        "rested_counts": np.zeros((T, 2, l_t), dtype=np.int64),
        "rested_shares": np.zeros((T, 2, l_t), dtype=np.int64),
        "cancelled_counts": np.zeros((T, 2, l_t), dtype=np.int64),
        "cancelled_shares": np.zeros((T, 2, l_t), dtype=np.int64),
        "consumed_counts": np.zeros((T, 2, l_t), dtype=np.int64),
        "consumed_shares": np.zeros((T, 2, l_t), dtype=np.int64),
        "consumed_ext_shares": np.zeros((T, 2), dtype=np.int64),
        "sampled_cancel_counts": np.zeros((T, 2), dtype=np.int64),
        "window_counts_before": np.zeros((T, 2, l_t), dtype=np.int64),
        "window_shares_before": np.zeros((T, 2, l_t), dtype=np.int64),
        "window_counts_after": np.zeros((T, 2, l_t), dtype=np.int64),
        "window_shares_after": np.zeros((T, 2, l_t), dtype=np.int64),
        "lo_exec_shares": np.zeros((T, 2), dtype=np.int64),
        "mo_counts": np.zeros((T, 2), dtype=np.int64),
        "mo_exec_shares": np.zeros((T, 2), dtype=np.int64),
        "mo_discard_shares": np.zeros((T, 2), dtype=np.int64),
    }

    ref_bid, ref_ask = book0.best_bid, book0.best_ask
    activities: list[IntervalActivity] | None = [] if config.keep_activity else None

    def window_ticks(side):
        return (ref_ask - s_values) if side == BID else (ref_bid + s_values)

    def record_snapshot(t):
        bb, ba = eng.best(BID), eng.best(ASK)
        snap.best_bid[t] = -1 if bb is None else bb
        snap.best_ask[t] = -1 if ba is None else ba
        snap.ref_bid[t] = ref_bid
        snap.ref_ask[t] = ref_ask
        bt, at = window_ticks(BID), window_ticks(ASK)
        snap.bid_counts[t] = eng.counts_at(BID, bt)
        snap.ask_counts[t] = eng.counts_at(ASK, at)
        snap.bid_shares[t] = eng.shares_at(BID, bt)
        snap.ask_shares[t] = eng.shares_at(ASK, at)
        snap.bid_exterior_shares[t] = eng.total_shares(BID) - int(snap.bid_shares[t].sum())
        snap.ask_exterior_shares[t] = eng.total_shares(ASK) - int(snap.ask_shares[t].sum())

    record_snapshot(0)

    for t in range(1, T + 1):
        v_prev = {
            side: eng.counts_at(side, window_ticks(side)) for side in (BID, ASK)
        }
        sh_prev = {
            side: eng.shares_at(side, window_ticks(side)) for side in (BID, ASK)
        }
        lam_lo = {}
        n_lo = {}
        sizes = {}
        # limit-order layer, ask side then bid side
        for side in (ASK, BID):
            g = _skew_t_vec(theta_eff.m_lo, theta_eff.skew_lo, theta_eff.nu, chol, rng)
            lam = mu0_lo * special.ndtr(g)
            n = rng.poisson(lam).astype(np.int64)
            lv_sizes = tuple(
                sample_order_sizes(size_model, int(n[i]), rng) for i in range(l_t)
            )
            lam_lo[side] = lam
            n_lo[side] = n
            sizes[side] = lv_sizes
        # cancellation layer, ask side then bid side (fresh skew-t draws)
        vtilde = {side: v_prev[side] + n_lo[side] for side in (BID, ASK)}
        lam_c = {}
        n_c = {}
        for side in (ASK, BID):
            g = _skew_t_vec(theta_eff.m_lo, theta_eff.skew_lo, theta_eff.nu, chol, rng)
            lam = mu0_c * special.ndtr(g)
            counts = np.zeros(l_t, dtype=np.int64)
            for i in range(l_t):
                counts[i] = sample_truncated_poisson(float(lam[i]), int(vtilde[side][i]), rng)
            lam_c[side] = lam
            n_c[side] = counts
        # market-order layer: both sides bounded by the post-cancellation
        # passive resting-order totals of the opposite side
        lam_mo = {}
        mo_sizes = {}
        for side in (ASK, BID):
            opp = 1 - side
            r_tilde = int((vtilde[opp][passive_idx] - n_c[opp][passive_idx]).sum())
            w = 1.0 / rng.gamma(0.5 * theta_eff.nu, 2.0 / theta_eff.nu)
            z = rng.standard_normal()
            g_mo = theta_eff.skew_mo * w + math.sqrt(w) * theta_eff.sigma_mo * z
            lam = float(theta_eff.mu0_mo * special.ndtr(g_mo))
            n_mo = sample_truncated_poisson(lam, r_tilde, rng)
            mo_sizes[side] = sample_order_sizes(size_model, n_mo, rng)
            lam_mo[side] = lam

        lo_counts = np.stack([n_lo[BID], n_lo[ASK]])
        cancel_counts = np.stack([n_c[BID], n_c[ASK]])
        flat_bid = np.concatenate(sizes[BID]) if l_t else np.zeros(0, dtype=np.int64)
        flat_ask = np.concatenate(sizes[ASK]) if l_t else np.zeros(0, dtype=np.int64)
        stats = eng.apply_interval(
            ref_bid,
            ref_ask,
            l_p,
            l_d,
            lo_counts,
            flat_bid,
            flat_ask,
            cancel_counts,
            mo_sizes[BID],
            mo_sizes[ASK],
            seq,
            True,
        )
        seq = stats["next_seq"]

        k = t - 1
        # before/after volumes on this interval's window, pre re-anchor
        for side in (BID, ASK):
            realised["window_counts_before"][k, side] = v_prev[side]
            realised["window_shares_before"][k, side] = sh_prev[side]
            realised["window_counts_after"][k, side] = eng.counts_at(side, window_ticks(side))
            realised["window_shares_after"][k, side] = eng.shares_at(side, window_ticks(side))
        realised["lo_counts"][k] = lo_counts.sum(axis=1)
        realised["rested_counts"][k] = stats["rested_counts"]
        realised["rested_shares"][k] = stats["rested_shares"]
        realised["cancelled_counts"][k] = stats["cancelled_counts"]
        realised["cancelled_shares"][k] = stats["cancelled_shares"]
        realised["consumed_counts"][k] = stats["consumed_counts"]
        realised["consumed_shares"][k] = stats["consumed_shares"]
        realised["consumed_ext_shares"][k] = stats["consumed_ext_shares"]
        realised["sampled_cancel_counts"][k] = cancel_counts.sum(axis=1)
        realised["lo_exec_shares"][k] = stats["lo_exec_shares"]
        realised["mo_counts"][k] = [len(mo_sizes[BID]), len(mo_sizes[ASK])]
        realised["mo_exec_shares"][k] = stats["mo_exec_shares"]
        realised["mo_discard_shares"][k] = stats["mo_discard_shares"]

        if activities is not None:
            activities.append(
                IntervalActivity(
                    bid=SideActivity(
                        lo_counts=n_lo[BID],
                        lo_sizes=sizes[BID],
                        cancel_counts=n_c[BID],
                        mo_sizes=mo_sizes[BID],
                        lam_lo=lam_lo[BID],
                        lam_cancel=lam_c[BID],
                        lam_mo=lam_mo[BID],
                    ),
                    ask=SideActivity(
                        lo_counts=n_lo[ASK],
                        lo_sizes=sizes[ASK],
                        cancel_counts=n_c[ASK],
                        mo_sizes=mo_sizes[ASK],
                        lam_lo=lam_lo[ASK],
                        lam_cancel=lam_c[ASK],
                        lam_mo=lam_mo[ASK],
                    ),
                )
            )

        bb, ba = eng.best(BID), eng.best(ASK)
        if bb is not None:
            ref_bid = bb
        if ba is not None:
            ref_ask = ba
        record_snapshot(t)

    return SimResult(
        theta=theta,
        config=config,
        snapshots=snap,
        activities=activities,
        realised=realised,
    )


def _skew_t_vec(m, beta, nu, chol, rng):
    w = 1.0 / rng.gamma(0.5 * nu, 2.0 / nu)
    z = rng.standard_normal(m.shape[0])
    return m + beta * w + math.sqrt(w) * (chol @ z)
