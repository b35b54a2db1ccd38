"""Test-side oracles, independent of the package's engine implementations.

The naive book replayer below re-implements the interval update with plain
dict/list scans and no shared code, so it can serve as a brute-force ledger
oracle for the real engines.
"""

import numpy as np

BID, ASK = 0, 1


class NaiveBook:
    """Dict-of-lists book with full scans everywhere; oracle only."""

    def __init__(self):
        self.sides = ({}, {})  # side -> {tick: [[size, seq], ...]}

    def clone(self):
        other = NaiveBook()
        for side in (BID, ASK):
            for tick, orders in self.sides[side].items():
                other.sides[side][tick] = [list(o) for o in orders]
        return other

    def add(self, side, tick, size, seq):
        self.sides[side].setdefault(tick, []).append([size, seq])

    def best(self, side):
        ticks = [t for t, q in self.sides[side].items() if q]
        if not ticks:
            return None
        return max(ticks) if side == BID else min(ticks)

    def volumes(self, side, ticks):
        return np.array(
            [sum(o[0] for o in self.sides[side].get(t, [])) for t in ticks],
            dtype=np.int64,
        )

    def counts(self, side, ticks):
        return np.array([len(self.sides[side].get(t, [])) for t in ticks], dtype=np.int64)

    def total_shares(self, side):
        return sum(o[0] for q in self.sides[side].values() for o in q)

    def consume(self, side, lo, hi, budget):
        """Best price first, FIFO in level; returns executed shares."""
        executed = 0
        ticks = sorted(
            (t for t, q in self.sides[side].items() if q and lo <= t <= hi),
            reverse=(side == BID),
        )
        for t in ticks:
            q = self.sides[side][t]
            while q and budget > 0:
                take = min(q[0][0], budget)
                q[0][0] -= take
                budget -= take
                executed += take
                if q[0][0] == 0:
                    q.pop(0)
            if not q:
                del self.sides[side][t]
            if budget == 0:
                break
        return executed

    def limit(self, side, tick, size, seq):
        if side == BID:
            executed = self.consume(ASK, -(10**15), tick, size)
        else:
            executed = self.consume(BID, tick, 10**15, size)
        if size - executed > 0:
            self.add(side, tick, size - executed, seq)
        return executed

    def cancel_oldest(self, side, tick, count):
        q = self.sides[side].get(tick, [])
        n = min(count, len(q))
        removed = q[:n]
        del q[:n]
        if not q and tick in self.sides[side]:
            del self.sides[side][tick]
        return n, sum(o[0] for o in removed)

    def dump(self):
        out = {}
        for side in (BID, ASK):
            for tick in sorted(self.sides[side]):
                out[(side, tick)] = [tuple(o) for o in self.sides[side][tick]]
        return out


def naive_apply_interval(book, ref_bid, ref_ask, l_p, l_d, lo_counts, sizes_bid,
                         sizes_ask, cancel_counts, mo_buy, mo_sell, seq_start,
                         clamp=True):
    """Oracle version of the interval update; mirrors the documented order."""
    l_t = l_p + l_d
    seq = seq_start
    flats = (list(sizes_bid), list(sizes_ask))
    offs = np.zeros((2, l_t), dtype=int)
    offs[:, 1:] = np.cumsum(np.asarray(lo_counts)[:, :-1], axis=1)

    def tick_of(side, s):
        return ref_ask - s if side == BID else ref_bid + s

    def arrivals(side, s):
        nonlocal seq
        i = s + l_d - 1
        for j in range(int(lo_counts[side][i])):
            size = int(flats[side][offs[side, i] + j])
            book.limit(side, tick_of(side, s), size, seq)
            seq += 1

    for side in (BID, ASK):
        for s in range(1, l_p + 1):
            arrivals(side, s)
    for side in (BID, ASK):
        for s in range(0, -l_d, -1):
            arrivals(side, s)
    for side in (BID, ASK):
        for i in range(l_t):
            s = i - (l_d - 1)
            want = int(cancel_counts[side][i])
            if want:
                avail = len(book.sides[side].get(tick_of(side, s), []))
                if want > avail and not clamp:
                    raise AssertionError("oracle: inconsistent cancels")
                book.cancel_oldest(side, tick_of(side, s), min(want, avail))
    for size in mo_buy:
        book.consume(ASK, ref_bid - l_d + 1, ref_bid + l_p, int(size))
    for size in mo_sell:
        book.consume(BID, ref_ask - l_p, ref_ask + l_d - 1, int(size))
    return seq


def random_activity(rng, l_t, lo_mean=3.0, cancel_mean=2.0, mo_mean=2.0, max_size=8):
    lo_counts = rng.poisson(lo_mean, size=(2, l_t)).astype(np.int64)
    sizes_bid = rng.integers(1, max_size + 1, size=int(lo_counts[0].sum())).astype(np.int64)
    sizes_ask = rng.integers(1, max_size + 1, size=int(lo_counts[1].sum())).astype(np.int64)
    cancel_counts = rng.poisson(cancel_mean, size=(2, l_t)).astype(np.int64)
    mo_buy = rng.integers(1, max_size + 1, size=int(rng.poisson(mo_mean))).astype(np.int64)
    mo_sell = rng.integers(1, max_size + 1, size=int(rng.poisson(mo_mean))).astype(np.int64)
    return lo_counts, sizes_bid, sizes_ask, cancel_counts, mo_buy, mo_sell


def generate_garch(n, a0, a1, b1, rng):
    r = np.empty(n)
    h = a0 / (1.0 - a1 - b1)
    for t in range(n):
        if t:
            h = a0 + a1 * r[t - 1] ** 2 + b1 * h
        r[t] = np.sqrt(h) * rng.standard_normal()
    return r


def generate_ma1_levels(n, theta, drift, rng, scale=1.0):
    """Integrated MA(1): levels whose differences are MA(1) with drift."""
    eps = rng.standard_normal(n + 1) * scale
    z = eps[1:] + theta * eps[:-1] + drift
    return np.concatenate([[0.0], np.cumsum(z)])
