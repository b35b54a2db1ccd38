"""Order book state, the actively modelled level window, and the interval
update map.

Prices are absolute integer ticks throughout; currency conversion happens
only at I/O.  ``BookState`` has value semantics: applying an interval of
activity returns a new state and leaves the input untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import backend
from ._pykernel import ASK, BID
from .errors import CrossedSpec, EmptySide


@dataclass(frozen=True)
class Order:
    """A resting order: size in shares and a global time-priority number."""

    size: int
    seq: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError(f"order size must be >= 1, got {self.size}")


@dataclass(frozen=True)
class BookState:
    """Full two-sided book: tick -> FIFO queue of orders, per side.

    Empty levels are absent.  ``best_bid < best_ask`` must hold whenever both
    sides are non-empty.
    """

    bids: Mapping[int, tuple[Order, ...]]
    asks: Mapping[int, tuple[Order, ...]]
    tick_size: float = 0.01

    def __post_init__(self):
        for ladder in (self.bids, self.asks):
            for tick, queue in ladder.items():
                if len(queue) == 0:
                    raise ValueError(f"empty queue stored at tick {tick}")
        bb, ba = self.best_bid, self.best_ask
        if bb is not None and ba is not None and bb >= ba:
            raise CrossedSpec(f"crossed book: best bid {bb} >= best ask {ba}")

    @property
    def best_bid(self) -> int | None:
        return max(self.bids) if self.bids else None

    @property
    def best_ask(self) -> int | None:
        return min(self.asks) if self.asks else None

    def level_volume(self, side: int, tick: int) -> int:
        ladder = self.bids if side == BID else self.asks
        return sum(o.size for o in ladder.get(tick, ()))

    def total_volume(self, side: int) -> int:
        ladder = self.bids if side == BID else self.asks
        return sum(o.size for q in ladder.values() for o in q)


@dataclass(frozen=True)
class ActiveWindow:
    """The actively modelled levels around the interval-start reference prices.

    Relative level ``s`` runs over ``{-l_d+1, ..., 0, ..., l_p}``; bid level
    ``s`` maps to tick ``ref_ask - s`` and ask level ``s`` to ``ref_bid + s``.
    """

    ref_bid: int
    ref_ask: int
    l_p: int
    l_d: int

    def __post_init__(self):
        if self.l_p < 1 or self.l_d < 1:
            raise ValueError("l_p and l_d must be positive")

    @property
    def l_t(self) -> int:
        return self.l_p + self.l_d

    @property
    def levels(self) -> np.ndarray:
        """Relative levels s in ascending order, -l_d+1 .. l_p."""
        return np.arange(-self.l_d + 1, self.l_p + 1, dtype=np.int64)

    def bid_tick(self, s: int) -> int:
        return self.ref_ask - s

    def ask_tick(self, s: int) -> int:
        return self.ref_bid + s

    def bid_ticks(self) -> np.ndarray:
        return self.ref_ask - self.levels

    def ask_ticks(self) -> np.ndarray:
        return self.ref_bid + self.levels

    def ticks(self, side: int) -> np.ndarray:
        return self.bid_ticks() if side == BID else self.ask_ticks()

    def level_index(self, s: int) -> int:
        """Array index of relative level s (0-based from -l_d+1)."""
        return s + self.l_d - 1


@dataclass
class SideActivity:
    """One side's sampled events for one interval.

    ``lo_counts`` and ``cancel_counts`` are int64 vectors of length ``l_t``
    indexed by ascending relative level; ``lo_sizes`` holds one int64 array
    of order sizes per level; ``mo_sizes`` are this side's market order
    sizes (a bid-side market order is a buy).  The sampled intensities are
    kept for logging.
    """

    lo_counts: np.ndarray
    lo_sizes: tuple[np.ndarray, ...]
    cancel_counts: np.ndarray
    mo_sizes: np.ndarray
    lam_lo: np.ndarray | None = None
    lam_cancel: np.ndarray | None = None
    lam_mo: float | None = None

    @property
    def mo_count(self) -> int:
        return len(self.mo_sizes)

    def validate(self, l_t: int) -> None:
        if len(self.lo_counts) != l_t or len(self.cancel_counts) != l_t:
            raise ValueError("activity vectors must have length l_t")
        if len(self.lo_sizes) != l_t:
            raise ValueError("lo_sizes must hold one array per level")
        for n, sizes in zip(self.lo_counts, self.lo_sizes):
            if int(n) != len(sizes):
                raise ValueError("lo_sizes lengths inconsistent with lo_counts")
            if len(sizes) and int(np.min(sizes)) < 1:
                raise ValueError("order sizes must be >= 1")
        if np.any(self.lo_counts < 0) or np.any(self.cancel_counts < 0):
            raise ValueError("counts must be non-negative")
        if len(self.mo_sizes) and int(np.min(self.mo_sizes)) < 1:
            raise ValueError("market order sizes must be >= 1")


def empty_side_activity(l_t: int) -> SideActivity:
    z = np.zeros(l_t, dtype=np.int64)
    return SideActivity(
        lo_counts=z.copy(),
        lo_sizes=tuple(np.zeros(0, dtype=np.int64) for _ in range(l_t)),
        cancel_counts=z.copy(),
        mo_sizes=np.zeros(0, dtype=np.int64),
    )


@dataclass
class IntervalActivity:
    """Both sides' sampled counts, sizes and intensities for one interval."""

    bid: SideActivity
    ask: SideActivity

    def side(self, side: int) -> SideActivity:
        return self.bid if side == BID else self.ask

    def validate(self, l_t: int) -> None:
        self.bid.validate(l_t)
        self.ask.validate(l_t)


@dataclass(frozen=True)
class WindowVolumes:
    """Per-level order counts and share volumes inside a window."""

    bid_counts: np.ndarray
    ask_counts: np.ndarray
    bid_shares: np.ndarray
    ask_shares: np.ndarray


def build_window(book: BookState, l_p: int, l_d: int) -> ActiveWindow:
    """Anchor the modelled window at the book's current best bid and ask."""
    bb, ba = book.best_bid, book.best_ask
    if bb is None:
        raise EmptySide("bid side is empty; cannot anchor window")
    if ba is None:
        raise EmptySide("ask side is empty; cannot anchor window")
    return ActiveWindow(ref_bid=bb, ref_ask=ba, l_p=l_p, l_d=l_d)


def engine_from_book(book: BookState, kind: str | None = None):
    """Load a BookState into a fresh mutable engine (selected backend)."""
    eng = backend.make_engine(kind)
    for side, ladder in ((BID, book.bids), (ASK, book.asks)):
        for tick in sorted(ladder):
            for o in ladder[tick]:
                eng.add_resting(side, int(tick), int(o.size), int(o.seq))
    return eng


def book_from_engine(eng, tick_size: float = 0.01) -> BookState:
    """Snapshot an engine back into an immutable BookState."""
    ladders = ({}, {})
    for side in (BID, ASK):
        for tick in eng.occupied_ticks(side):
            tick = int(tick)
            orders = tuple(Order(int(sz), int(sq)) for sz, sq in eng.level_orders(side, tick))
            ladders[side][tick] = orders
    return BookState(bids=ladders[BID], asks=ladders[ASK], tick_size=tick_size)


def apply_interval(
    book: BookState,
    window: ActiveWindow,
    activity: IntervalActivity,
    *,
    strict: bool = True,
    backend_kind: str | None = None,
) -> BookState:
    """Apply one interval of events and return the new book state.

    Events are processed in the fixed order passive limit orders, aggressive
    limit orders, cancellations, market orders.  Any arriving limit order
    that crosses the current opposite best executes immediately in
    price-time priority and its residual rests at its own level; market
    orders walk the opposite side's modelled window and discard any
    remainder.  Volume outside the window is untouched.  The input state is
    not modified.

    With ``strict`` (the default) a cancellation count exceeding the orders
    resting at its level when cancellations are processed raises
    InconsistentActivity.
    """
    activity.validate(window.l_t)
    eng = engine_from_book(book, backend_kind)
    seq_start = 0
    for ladder in (book.bids, book.asks):
        for q in ladder.values():
            for o in q:
                seq_start = max(seq_start, o.seq + 1)
    lo_counts = np.stack([activity.bid.lo_counts, activity.ask.lo_counts]).astype(np.int64)
    cancel_counts = np.stack(
        [activity.bid.cancel_counts, activity.ask.cancel_counts]
    ).astype(np.int64)
    flat_bid = _flat_sizes(activity.bid)
    flat_ask = _flat_sizes(activity.ask)
    eng.apply_interval(
        window.ref_bid,
        window.ref_ask,
        window.l_p,
        window.l_d,
        lo_counts,
        flat_bid,
        flat_ask,
        cancel_counts,
        np.asarray(activity.bid.mo_sizes, dtype=np.int64),
        np.asarray(activity.ask.mo_sizes, dtype=np.int64),
        seq_start,
        not strict,
    )
    return book_from_engine(eng, book.tick_size)


def _flat_sizes(side_activity: SideActivity) -> np.ndarray:
    if side_activity.lo_sizes:
        return np.concatenate(
            [np.asarray(a, dtype=np.int64) for a in side_activity.lo_sizes]
        )
    return np.zeros(0, dtype=np.int64)


def window_volumes(book: BookState, window: ActiveWindow) -> WindowVolumes:
    """Order counts and share volumes per modelled level per side.

    Absent levels report zero.
    """
    bid_counts = np.zeros(window.l_t, dtype=np.int64)
    bid_shares = np.zeros(window.l_t, dtype=np.int64)
    ask_counts = np.zeros(window.l_t, dtype=np.int64)
    ask_shares = np.zeros(window.l_t, dtype=np.int64)
    for i, s in enumerate(window.levels):
        bq = book.bids.get(int(window.bid_tick(s)), ())
        aq = book.asks.get(int(window.ask_tick(s)), ())
        bid_counts[i] = len(bq)
        bid_shares[i] = sum(o.size for o in bq)
        ask_counts[i] = len(aq)
        ask_shares[i] = sum(o.size for o in aq)
    return WindowVolumes(bid_counts, ask_counts, bid_shares, ask_shares)
