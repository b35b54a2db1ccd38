"""Pure-Python book engine: price-tick ladders of FIFO order queues.

This is the reference implementation of the update map that applies one
interval of aggregate agent activity to the book.  The compiled extension
(``lobforge._kernel``) implements the same class with identical semantics;
``lobforge.backend`` picks one at import time.  All quantities are integers
(ticks, shares, sequence numbers), so the two backends produce bit-identical
books for identical inputs.

Conventions shared by both backends:

* sides are ``BID = 0`` and ``ASK = 1``;
* window levels are indexed ``i = s + l_d - 1`` for relative level
  ``s in {-l_d+1, ..., l_p}``; bid level ``s`` sits at tick ``ref_ask - s``
  and ask level ``s`` at tick ``ref_bid + s``;
* one interval is applied in the fixed order: passive limit orders,
  aggressive limit orders, cancellations, market orders.  Within each step
  the bid side is processed before the ask side and levels are processed in
  ascending ``s`` for passive arrivals and cancellations and descending
  ``s`` (from 0 down) for aggressive arrivals.  Market orders are processed
  buys first.  Arrival order within a level follows the sampled size order.
* an arriving limit order first executes against any opposite resting
  volume it crosses (best price first, FIFO within a price) and the
  residual rests at its own tick; market orders walk the opposite side but
  only inside that side's modelled window, and any unfilled remainder is
  discarded;
* cancellations remove the oldest orders of a level in full.
"""

from collections import deque

import numpy as np

from .errors import InconsistentActivity

BID = 0
ASK = 1

# Sentinel bounds meaning "no window restriction" (event replay).
NO_BOUND_LO = -(2**62)
NO_BOUND_HI = 2**62


class BookEngine:
    """Mutable two-sided ladder of FIFO queues keyed by absolute tick."""

    __slots__ = ("_levels", "_shares", "_orders", "_best")

    def __init__(self):
        self._levels = ({}, {})  # side -> {tick: deque of [size, seq]}
        self._shares = [0, 0]
        self._orders = [0, 0]
        self._best = [None, None]  # cached; bid: max tick, ask: min tick

    # ------------------------------------------------------------------
    # state queries

    def best(self, side):
        if self._orders[side] == 0:
            return None
        cached = self._best[side]
        if cached is not None and cached in self._levels[side]:
            return cached
        ticks = self._levels[side]
        best = max(ticks) if side == BID else min(ticks)
        self._best[side] = best
        return best

    def total_shares(self, side):
        return self._shares[side]

    def total_orders(self, side):
        return self._orders[side]

    def level_count(self, side, tick):
        q = self._levels[side].get(tick)
        return 0 if q is None else len(q)

    def level_shares(self, side, tick):
        q = self._levels[side].get(tick)
        return 0 if q is None else sum(o[0] for o in q)

    def counts_at(self, side, ticks):
        lv = self._levels[side]
        return np.array([len(lv[t]) if t in lv else 0 for t in ticks], dtype=np.int64)

    def shares_at(self, side, ticks):
        lv = self._levels[side]
        return np.array(
            [sum(o[0] for o in lv[t]) if t in lv else 0 for t in ticks],
            dtype=np.int64,
        )

    def occupied_ticks(self, side):
        return np.array(sorted(self._levels[side]), dtype=np.int64)

    def level_orders(self, side, tick):
        q = self._levels[side].get(tick)
        return [] if q is None else [(o[0], o[1]) for o in q]

    # ------------------------------------------------------------------
    # primitive mutations

    def add_resting(self, side, tick, size, seq):
        """Append an order at the back of a queue without matching."""
        lv = self._levels[side]
        q = lv.get(tick)
        if q is None:
            q = deque()
            lv[tick] = q
        q.append([size, seq])
        self._shares[side] += size
        self._orders[side] += 1
        best = self._best[side]
        if best is None or (tick > best if side == BID else tick < best):
            self._best[side] = tick

    def _consume(self, side, lo, hi, budget, sink=None):
        """Remove up to ``budget`` shares from ``side`` at ticks in [lo, hi].

        Best price first (highest bid / lowest ask), FIFO within a tick;
        the front order may be partially filled.  Returns executed shares.
        ``sink``, when given, receives ``(tick, orders_removed, shares)``
        per touched tick.
        """
        if budget <= 0 or self._orders[side] == 0:
            return 0
        lv = self._levels[side]
        candidates = [t for t in lv if lo <= t <= hi]
        candidates.sort(reverse=(side == BID))
        executed = 0
        for tick in candidates:
            if budget <= 0:
                break
            q = lv[tick]
            removed_orders = 0
            removed_shares = 0
            while q and budget > 0:
                head = q[0]
                fill = head[0] if head[0] <= budget else budget
                head[0] -= fill
                budget -= fill
                executed += fill
                removed_shares += fill
                if head[0] == 0:
                    q.popleft()
                    removed_orders += 1
            self._shares[side] -= removed_shares
            self._orders[side] -= removed_orders
            if not q:
                del lv[tick]
                if self._best[side] == tick:
                    self._best[side] = None
            if sink is not None and removed_shares:
                sink(tick, removed_orders, removed_shares)
        return executed

    def _limit(self, side, tick, size, seq, sink):
        opp = 1 - side
        if side == BID:
            executed = self._consume(opp, NO_BOUND_LO, tick, size, sink)
        else:
            executed = self._consume(opp, tick, NO_BOUND_HI, size, sink)
        residual = size - executed
        if residual > 0:
            self.add_resting(side, tick, residual, seq)
        return executed

    def limit(self, side, tick, size, seq):
        """Match-then-rest arrival.  Returns shares executed on arrival."""
        return self._limit(side, tick, size, seq, None)

    def market(self, side, size, opp_lo=None, opp_hi=None):
        """Execute a market order against the opposite side within bounds.

        ``side`` is the order's own side (BID = buy).  Returns executed
        shares; the remainder is discarded.  ``None`` bounds mean the whole
        opposite ladder.
        """
        lo = NO_BOUND_LO if opp_lo is None else opp_lo
        hi = NO_BOUND_HI if opp_hi is None else opp_hi
        return self._consume(1 - side, lo, hi, size, None)

    def cancel_oldest(self, side, tick, count):
        """Remove up to ``count`` whole orders from the front of a queue."""
        lv = self._levels[side]
        q = lv.get(tick)
        if q is None or count <= 0:
            return 0, 0
        n = min(count, len(q))
        shares = 0
        for _ in range(n):
            shares += q.popleft()[0]
        self._shares[side] -= shares
        self._orders[side] -= n
        if not q:
            del lv[tick]
            if self._best[side] == tick:
                self._best[side] = None
        return n, shares

    # ------------------------------------------------------------------
    # one interval of aggregate activity

    def apply_interval(
        self,
        ref_bid,
        ref_ask,
        l_p,
        l_d,
        lo_counts,
        lo_sizes_bid,
        lo_sizes_ask,
        cancel_counts,
        mo_sizes_buy,
        mo_sizes_sell,
        seq_start,
        clamp_cancels,
    ):
        """Apply one interval of events in the fixed processing order.

        ``lo_counts`` and ``cancel_counts`` are int64 arrays of shape
        ``(2, l_t)`` indexed ``[side, i]`` with ``i = s + l_d - 1``;
        ``lo_sizes_*`` are flat int64 arrays of the per-level order sizes
        concatenated in ascending level index.  Market order sizes are
        given per order; buys consume the ask side, sells the bid side.

        With ``clamp_cancels`` the requested cancellation counts are capped
        at the orders actually resting when cancellations are processed
        (the simulation path); otherwise an excess raises
        InconsistentActivity.

        Returns a dict of realised per-level statistics.
        """
        l_t = l_p + l_d
        rested_counts = np.zeros((2, l_t), dtype=np.int64)
        rested_shares = np.zeros((2, l_t), dtype=np.int64)
        cancelled_counts = np.zeros((2, l_t), dtype=np.int64)
        cancelled_shares = np.zeros((2, l_t), dtype=np.int64)
        consumed_counts = np.zeros((2, l_t), dtype=np.int64)
        consumed_shares = np.zeros((2, l_t), dtype=np.int64)
        consumed_ext_counts = np.zeros(2, dtype=np.int64)
        consumed_ext_shares = np.zeros(2, dtype=np.int64)
        lo_exec_shares = np.zeros(2, dtype=np.int64)
        mo_exec_shares = np.zeros(2, dtype=np.int64)
        mo_discard_shares = np.zeros(2, dtype=np.int64)

        def tick_of(side, i):
            s = i - (l_d - 1)
            return ref_ask - s if side == BID else ref_bid + s

        def level_of(side, tick):
            s = (ref_ask - tick) if side == BID else (tick - ref_bid)
            i = s + l_d - 1
            return i if 0 <= i < l_t else -1

        def make_sink(resting_side):
            def sink(tick, n_orders, shares):
                i = level_of(resting_side, tick)
                if i >= 0:
                    consumed_counts[resting_side, i] += n_orders
                    consumed_shares[resting_side, i] += shares
                else:
                    consumed_ext_counts[resting_side] += n_orders
                    consumed_ext_shares[resting_side] += shares

            return sink

        sinks = (make_sink(BID), make_sink(ASK))
        offsets = np.zeros((2, l_t), dtype=np.int64)
        offsets[:, 1:] = np.cumsum(lo_counts[:, :-1], axis=1)
        flats = (lo_sizes_bid, lo_sizes_ask)
        seq = seq_start

        def arrivals(side, i):
            nonlocal seq
            tick = tick_of(side, i)
            flat = flats[side]
            base = offsets[side, i]
            for j in range(lo_counts[side, i]):
                size = int(flat[base + j])
                executed = self._limit(side, tick, size, seq, sinks[1 - side])
                seq += 1
                lo_exec_shares[side] += executed
                if size > executed:
                    rested_counts[side, i] += 1
                    rested_shares[side, i] += size - executed

        # (1) passive limit orders: s = 1..l_p
        for side in (BID, ASK):
            for s in range(1, l_p + 1):
                arrivals(side, s + l_d - 1)
        # (2) aggressive limit orders: s = 0 down to -l_d+1
        for side in (BID, ASK):
            for s in range(0, -l_d, -1):
                arrivals(side, s + l_d - 1)
        # (3) cancellations, oldest orders removed in full
        for side in (BID, ASK):
            for i in range(l_t):
                want = int(cancel_counts[side, i])
                if want == 0:
                    continue
                tick = tick_of(side, i)
                avail = self.level_count(side, tick)
                if want > avail and not clamp_cancels:
                    raise InconsistentActivity(
                        f"cancel count {want} exceeds {avail} resting orders "
                        f"(side={side}, tick={tick})"
                    )
                n, shares = self.cancel_oldest(side, tick, min(want, avail))
                cancelled_counts[side, i] += n
                cancelled_shares[side, i] += shares
        # (4) market orders, buys first, window-bounded
        ask_lo, ask_hi = ref_bid - l_d + 1, ref_bid + l_p
        bid_lo, bid_hi = ref_ask - l_p, ref_ask + l_d - 1
        for size in mo_sizes_buy:
            size = int(size)
            executed = self._consume(ASK, ask_lo, ask_hi, size, sinks[ASK])
            mo_exec_shares[BID] += executed
            mo_discard_shares[BID] += size - executed
        for size in mo_sizes_sell:
            size = int(size)
            executed = self._consume(BID, bid_lo, bid_hi, size, sinks[BID])
            mo_exec_shares[ASK] += executed
            mo_discard_shares[ASK] += size - executed

        return {
            "rested_counts": rested_counts,
            "rested_shares": rested_shares,
            "cancelled_counts": cancelled_counts,
            "cancelled_shares": cancelled_shares,
            "consumed_counts": consumed_counts,
            "consumed_shares": consumed_shares,
            "consumed_ext_counts": consumed_ext_counts,
            "consumed_ext_shares": consumed_ext_shares,
            "lo_exec_shares": lo_exec_shares,
            "mo_exec_shares": mo_exec_shares,
            "mo_discard_shares": mo_discard_shares,
            "next_seq": seq,
        }
