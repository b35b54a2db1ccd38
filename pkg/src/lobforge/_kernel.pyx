# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled book engine.

Semantics twin of ``lobforge._pykernel.BookEngine``; see that module for the
contract (processing order, level indexing, clamp behaviour).  The ladder is
an arena of per-tick FIFO queues stored as linked lists in a flat order
pool, so one interval of activity is applied without touching Python
objects.  All quantities are int64, so both backends return bit-identical
books for identical inputs.
"""

import numpy as np

cimport numpy as cnp

from .errors import InconsistentActivity

cnp.import_array()

ctypedef cnp.int64_t i64

cdef i64 NO_LO = -(<i64>1 << 62)
cdef i64 NO_HI = (<i64>1 << 62)

BID = 0
ASK = 1


cdef class BookEngine:
    cdef:
        bint sized
        i64 base
        Py_ssize_t span
        object head_a, tail_a, cnt_a, sh_a
        i64[:, ::1] head
        i64[:, ::1] tail
        i64[:, ::1] cnt
        i64[:, ::1] sh
        object psize_a, pseq_a, pnext_a
        i64[::1] psize
        i64[::1] pseq
        i64[::1] pnext
        Py_ssize_t pool_cap
        i64 pool_top, free_head
        i64 tot_shares_[2]
        i64 tot_orders_[2]
        Py_ssize_t hint[2]
        # stats session used by apply_interval
        bint rec
        i64 s_ref_bid, s_ref_ask
        int s_lp, s_ld
        i64[:, ::1] s_cons_cnt
        i64[:, ::1] s_cons_sh
        i64[::1] s_ext_cnt
        i64[::1] s_ext_sh

    def __cinit__(self):
        self.sized = False
        self.base = 0
        self.span = 0
        self.pool_cap = 4096
        self.psize_a = np.empty(self.pool_cap, dtype=np.int64)
        self.pseq_a = np.empty(self.pool_cap, dtype=np.int64)
        self.pnext_a = np.empty(self.pool_cap, dtype=np.int64)
        self.psize = self.psize_a
        self.pseq = self.pseq_a
        self.pnext = self.pnext_a
        self.pool_top = 0
        self.free_head = -1
        self.tot_shares_[0] = 0
        self.tot_shares_[1] = 0
        self.tot_orders_[0] = 0
        self.tot_orders_[1] = 0
        self.hint[0] = -1
        self.hint[1] = -1
        self.rec = False

    # ------------------------------------------------------------------
    # arena and pool management

    cdef void _init_arena(self, i64 center):
        self.span = 8192
        self.base = center - (<i64>self.span) // 2
        self.head_a = np.full((2, self.span), -1, dtype=np.int64)
        self.tail_a = np.full((2, self.span), -1, dtype=np.int64)
        self.cnt_a = np.zeros((2, self.span), dtype=np.int64)
        self.sh_a = np.zeros((2, self.span), dtype=np.int64)
        self.head = self.head_a
        self.tail = self.tail_a
        self.cnt = self.cnt_a
        self.sh = self.sh_a
        self.sized = True

    cdef void _grow_arena(self, i64 tick):
        cdef i64 lo = self.base if self.base < tick else tick
        cdef i64 hi = self.base + self.span - 1
        if tick > hi:
            hi = tick
        cdef i64 need = hi - lo + 1 + 2 * <i64>self.span
        cdef Py_ssize_t new_span = self.span
        while new_span < need:
            new_span *= 2
        cdef i64 new_base = lo - (<i64>new_span - (hi - lo + 1)) // 2
        head_n = np.full((2, new_span), -1, dtype=np.int64)
        tail_n = np.full((2, new_span), -1, dtype=np.int64)
        cnt_n = np.zeros((2, new_span), dtype=np.int64)
        sh_n = np.zeros((2, new_span), dtype=np.int64)
        cdef Py_ssize_t off = <Py_ssize_t>(self.base - new_base)
        head_n[:, off:off + self.span] = self.head_a
        tail_n[:, off:off + self.span] = self.tail_a
        cnt_n[:, off:off + self.span] = self.cnt_a
        sh_n[:, off:off + self.span] = self.sh_a
        self.head_a, self.tail_a, self.cnt_a, self.sh_a = head_n, tail_n, cnt_n, sh_n
        self.head = self.head_a
        self.tail = self.tail_a
        self.cnt = self.cnt_a
        self.sh = self.sh_a
        if self.hint[0] >= 0:
            self.hint[0] += off
        if self.hint[1] >= 0:
            self.hint[1] += off
        self.base = new_base
        self.span = new_span

    cdef Py_ssize_t _ensure_slot(self, i64 tick):
        if not self.sized:
            self._init_arena(tick)
        if tick < self.base or tick >= self.base + self.span:
            self._grow_arena(tick)
        return <Py_ssize_t>(tick - self.base)

    cdef void _grow_pool(self):
        cdef Py_ssize_t new_cap = self.pool_cap * 2
        psize_n = np.empty(new_cap, dtype=np.int64)
        pseq_n = np.empty(new_cap, dtype=np.int64)
        pnext_n = np.empty(new_cap, dtype=np.int64)
        psize_n[: self.pool_cap] = self.psize_a
        pseq_n[: self.pool_cap] = self.pseq_a
        pnext_n[: self.pool_cap] = self.pnext_a
        self.psize_a, self.pseq_a, self.pnext_a = psize_n, pseq_n, pnext_n
        self.psize = self.psize_a
        self.pseq = self.pseq_a
        self.pnext = self.pnext_a
        self.pool_cap = new_cap

    cdef i64 _alloc(self, i64 size, i64 seq):
        cdef i64 idx
        if self.free_head >= 0:
            idx = self.free_head
            self.free_head = self.pnext[idx]
        else:
            if self.pool_top >= <i64>self.pool_cap:
                self._grow_pool()
            idx = self.pool_top
            self.pool_top += 1
        self.psize[idx] = size
        self.pseq[idx] = seq
        self.pnext[idx] = -1
        return idx

    cdef void _push(self, int side, Py_ssize_t slot, i64 size, i64 seq):
        cdef i64 node = self._alloc(size, seq)
        cdef i64 t = self.tail[side, slot]
        if t < 0:
            self.head[side, slot] = node
        else:
            self.pnext[t] = node
        self.tail[side, slot] = node
        self.cnt[side, slot] += 1
        self.sh[side, slot] += size
        self.tot_shares_[side] += size
        self.tot_orders_[side] += 1
        if side == 0:
            if self.hint[0] < slot:
                self.hint[0] = slot
        else:
            if self.hint[1] < 0 or slot < self.hint[1]:
                self.hint[1] = slot

    cdef Py_ssize_t _best_slot(self, int side):
        if self.tot_orders_[side] == 0:
            return -1
        cdef Py_ssize_t s = self.hint[side]
        if side == 0:
            if s >= self.span:
                s = self.span - 1
            while self.cnt[0, s] == 0:
                s -= 1
        else:
            if s < 0:
                s = 0
            while self.cnt[1, s] == 0:
                s += 1
        self.hint[side] = s
        return s

    # ------------------------------------------------------------------
    # consumption core (matching / market orders)

    cdef i64 _consume(self, int side, i64 lo_t, i64 hi_t, i64 budget):
        if budget <= 0 or self.tot_orders_[side] == 0:
            return 0
        cdef Py_ssize_t best = self._best_slot(side)
        cdef i64 lo_s, hi_s, step, s
        cdef i64 lo_clip = lo_t - self.base
        cdef i64 hi_clip = hi_t - self.base
        if lo_clip < 0:
            lo_clip = 0
        if hi_clip > <i64>self.span - 1:
            hi_clip = <i64>self.span - 1
        if side == 1:
            # asks: cheapest tick first
            lo_s = best if best > lo_clip else lo_clip
            hi_s = hi_clip
            step = 1
        else:
            # bids: dearest tick first
            hi_s = best if best < hi_clip else hi_clip
            lo_s = lo_clip
            step = -1
        if lo_s > hi_s:
            return 0
        cdef i64 executed = 0
        cdef i64 h, nxt, fill, rm_n, rm_sh, tick, lvl
        cdef int i
        s = hi_s if step < 0 else lo_s
        while lo_s <= s <= hi_s and budget > 0:
            if self.cnt[side, s] == 0:
                s += step
                continue
            h = self.head[side, s]
            rm_n = 0
            rm_sh = 0
            while h >= 0 and budget > 0:
                fill = self.psize[h]
                if fill <= budget:
                    budget -= fill
                    rm_sh += fill
                    rm_n += 1
                    nxt = self.pnext[h]
                    self.pnext[h] = self.free_head
                    self.free_head = h
                    h = nxt
                else:
                    self.psize[h] -= budget
                    rm_sh += budget
                    budget = 0
            self.head[side, s] = h
            if h < 0:
                self.tail[side, s] = -1
            self.cnt[side, s] -= rm_n
            self.sh[side, s] -= rm_sh
            self.tot_orders_[side] -= rm_n
            self.tot_shares_[side] -= rm_sh
            executed += rm_sh
            if self.rec and rm_sh > 0:
                tick = self.base + s
                if side == 0:
                    lvl = self.s_ref_ask - tick
                else:
                    lvl = tick - self.s_ref_bid
                i = <int>lvl + self.s_ld - 1
                if 0 <= i < self.s_lp + self.s_ld:
                    self.s_cons_cnt[side, i] += rm_n
                    self.s_cons_sh[side, i] += rm_sh
                else:
                    self.s_ext_cnt[side] += rm_n
                    self.s_ext_sh[side] += rm_sh
            s += step
        return executed

    cdef i64 _limit(self, int side, i64 tick, i64 size, i64 seq):
        cdef i64 executed
        if side == 0:
            executed = self._consume(1, NO_LO, tick, size)
        else:
            executed = self._consume(0, tick, NO_HI, size)
        cdef Py_ssize_t slot
        if size - executed > 0:
            slot = self._ensure_slot(tick)
            self._push(side, slot, size - executed, seq)
        return executed

    cdef void _cancel(self, int side, i64 tick, i64 count, i64 *out_n, i64 *out_sh):
        out_n[0] = 0
        out_sh[0] = 0
        if count <= 0 or not self.sized:
            return
        if tick < self.base or tick >= self.base + self.span:
            return
        cdef Py_ssize_t slot = <Py_ssize_t>(tick - self.base)
        cdef i64 avail = self.cnt[side, slot]
        cdef i64 n = count if count < avail else avail
        cdef i64 h, nxt, shares = 0, k = 0
        h = self.head[side, slot]
        while k < n:
            shares += self.psize[h]
            nxt = self.pnext[h]
            self.pnext[h] = self.free_head
            self.free_head = h
            h = nxt
            k += 1
        self.head[side, slot] = h
        if h < 0:
            self.tail[side, slot] = -1
        self.cnt[side, slot] -= n
        self.sh[side, slot] -= shares
        self.tot_orders_[side] -= n
        self.tot_shares_[side] -= shares
        out_n[0] = n
        out_sh[0] = shares

    # ------------------------------------------------------------------
    # public surface (mirrors the pure-Python engine)

    def best(self, int side):
        cdef Py_ssize_t s = self._best_slot(side)
        if s < 0:
            return None
        return int(self.base + s)

    def total_shares(self, int side):
        return int(self.tot_shares_[side])

    def total_orders(self, int side):
        return int(self.tot_orders_[side])

    def level_count(self, int side, i64 tick):
        if not self.sized or tick < self.base or tick >= self.base + self.span:
            return 0
        return int(self.cnt[side, <Py_ssize_t>(tick - self.base)])

    def level_shares(self, int side, i64 tick):
        if not self.sized or tick < self.base or tick >= self.base + self.span:
            return 0
        return int(self.sh[side, <Py_ssize_t>(tick - self.base)])

    def counts_at(self, int side, ticks):
        cdef cnp.ndarray[i64, ndim=1] t = np.ascontiguousarray(ticks, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=1] out = np.zeros(t.shape[0], dtype=np.int64)
        cdef Py_ssize_t i
        for i in range(t.shape[0]):
            out[i] = self.level_count(side, t[i])
        return out

    def shares_at(self, int side, ticks):
        cdef cnp.ndarray[i64, ndim=1] t = np.ascontiguousarray(ticks, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=1] out = np.zeros(t.shape[0], dtype=np.int64)
        cdef Py_ssize_t i
        for i in range(t.shape[0]):
            out[i] = self.level_shares(side, t[i])
        return out

    def occupied_ticks(self, int side):
        out = []
        cdef Py_ssize_t s
        for s in range(self.span):
            if self.cnt[side, s] > 0:
                out.append(int(self.base + s))
        return np.array(out, dtype=np.int64)

    def level_orders(self, int side, i64 tick):
        out = []
        if not self.sized or tick < self.base or tick >= self.base + self.span:
            return out
        cdef i64 h = self.head[side, <Py_ssize_t>(tick - self.base)]
        while h >= 0:
            out.append((int(self.psize[h]), int(self.pseq[h])))
            h = self.pnext[h]
        return out

    def add_resting(self, int side, i64 tick, i64 size, i64 seq):
        cdef Py_ssize_t slot = self._ensure_slot(tick)
        self._push(side, slot, size, seq)

    def limit(self, int side, i64 tick, i64 size, i64 seq):
        self.rec = False
        return int(self._limit(side, tick, size, seq))

    def market(self, int side, i64 size, opp_lo=None, opp_hi=None):
        cdef i64 lo = NO_LO if opp_lo is None else <i64>opp_lo
        cdef i64 hi = NO_HI if opp_hi is None else <i64>opp_hi
        self.rec = False
        return int(self._consume(1 - side, lo, hi, size))

    def cancel_oldest(self, int side, i64 tick, i64 count):
        cdef i64 n, shares
        self._cancel(side, tick, count, &n, &shares)
        return int(n), int(shares)

    def apply_interval(
        self,
        i64 ref_bid,
        i64 ref_ask,
        int l_p,
        int l_d,
        lo_counts,
        lo_sizes_bid,
        lo_sizes_ask,
        cancel_counts,
        mo_sizes_buy,
        mo_sizes_sell,
        i64 seq_start,
        bint clamp_cancels,
    ):
        cdef int l_t = l_p + l_d
        cdef cnp.ndarray[i64, ndim=2] lo_c = np.ascontiguousarray(lo_counts, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=2] ca_c = np.ascontiguousarray(cancel_counts, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=1] szb = np.ascontiguousarray(lo_sizes_bid, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=1] sza = np.ascontiguousarray(lo_sizes_ask, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=1] mob = np.ascontiguousarray(mo_sizes_buy, dtype=np.int64)
        cdef cnp.ndarray[i64, ndim=1] mos = np.ascontiguousarray(mo_sizes_sell, dtype=np.int64)

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

        cdef i64[:, ::1] rc = rested_counts
        cdef i64[:, ::1] rs = rested_shares
        cdef i64[:, ::1] cc = cancelled_counts
        cdef i64[:, ::1] cs = cancelled_shares
        cdef i64[::1] loex = lo_exec_shares
        cdef i64[::1] moex = mo_exec_shares
        cdef i64[::1] modis = mo_discard_shares

        self.s_cons_cnt = consumed_counts
        self.s_cons_sh = consumed_shares
        self.s_ext_cnt = consumed_ext_counts
        self.s_ext_sh = consumed_ext_shares
        self.s_ref_bid = ref_bid
        self.s_ref_ask = ref_ask
        self.s_lp = l_p
        self.s_ld = l_d
        self.rec = True

        cdef cnp.ndarray[i64, ndim=2] offs_a = np.zeros((2, l_t), dtype=np.int64)
        cdef i64[:, ::1] offs = offs_a
        cdef int side, i, s
        cdef i64 acc
        for side in range(2):
            acc = 0
            for i in range(l_t):
                offs[side, i] = acc
                acc += lo_c[side, i]

        cdef i64 seq = seq_start
        cdef i64 tick, size, executed, j, want, avail, n, shares
        cdef i64[::1] flat

        try:
            # (1) passive arrivals: s = 1..l_p
            for side in range(2):
                for s in range(1, l_p + 1):
                    i = s + l_d - 1
                    tick = (ref_ask - s) if side == 0 else (ref_bid + s)
                    flat = szb if side == 0 else sza
                    for j in range(lo_c[side, i]):
                        size = flat[offs[side, i] + j]
                        executed = self._limit(side, tick, size, seq)
                        seq += 1
                        loex[side] += executed
                        if size > executed:
                            rc[side, i] += 1
                            rs[side, i] += size - executed
            # (2) aggressive arrivals: s = 0 down to -l_d+1
            for side in range(2):
                for s in range(0, -l_d, -1):
                    i = s + l_d - 1
                    tick = (ref_ask - s) if side == 0 else (ref_bid + s)
                    flat = szb if side == 0 else sza
                    for j in range(lo_c[side, i]):
                        size = flat[offs[side, i] + j]
                        executed = self._limit(side, tick, size, seq)
                        seq += 1
                        loex[side] += executed
                        if size > executed:
                            rc[side, i] += 1
                            rs[side, i] += size - executed
            # (3) cancellations
            for side in range(2):
                for i in range(l_t):
                    want = ca_c[side, i]
                    if want == 0:
                        continue
                    s = i - (l_d - 1)
                    tick = (ref_ask - s) if side == 0 else (ref_bid + s)
                    avail = self.level_count(side, tick)
                    if want > avail and not clamp_cancels:
                        raise InconsistentActivity(
                            f"cancel count {want} exceeds {avail} resting orders "
                            f"(side={side}, tick={tick})"
                        )
                    self._cancel(side, tick, want if want < avail else avail, &n, &shares)
                    cc[side, i] += n
                    cs[side, i] += shares
            # (4) market orders, buys first, window-bounded
            for j in range(mob.shape[0]):
                size = mob[j]
                executed = self._consume(1, ref_bid - l_d + 1, ref_bid + l_p, size)
                moex[0] += executed
                modis[0] += size - executed
            for j in range(mos.shape[0]):
                size = mos[j]
                executed = self._consume(0, ref_ask - l_p, ref_ask + l_d - 1, size)
                moex[1] += executed
                modis[1] += size - executed
        finally:
            self.rec = False

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
            "next_seq": int(seq),
        }
