"""Level-2 data ingestion, replay, descriptive analytics, and persistence.

The canonical interchange format for raw activity is a CSV event stream
with header ``ts_ms,event,side,price_tick,size`` (event one of
``limit|cancel|market``, side ``bid|ask``; a bid market order is a buy).
Converting a venue's native feed into this schema is a documented,
external concern.  Simulated days are persisted as a snapshot CSV plus a
JSON metadata header; both round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass

import numpy as np

from . import backend
from ._pykernel import ASK, BID
from .agents import SimResult, SnapshotSeries
from .errors import (
    DegenerateLevel,
    InvalidConfig,
    MonotonicityError,
    ParseError,
    ReplayError,
)

__all__ = [
    "EventType",
    "Side",
    "EventRecord",
    "DaySnapshotSeries",
    "ingest_events",
    "write_events",
    "events_to_snapshots",
    "intensity_correlation",
    "order_size_histogram",
    "write_sim_result",
    "read_sim_result",
    "read_snapshot_csv",
]


class EventType(enum.Enum):
    LimitOrder = "limit"
    Cancel = "cancel"
    MarketOrder = "market"


class Side(enum.Enum):
    Bid = "bid"
    Ask = "ask"


@dataclass(frozen=True)
class EventRecord:
    ts_ms: int
    event: EventType
    side: Side
    price_tick: int
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("event size must be >= 1")


# an ingested day is the same snapshot container the simulator produces
DaySnapshotSeries = SnapshotSeries

_HEADER = ["ts_ms", "event", "side", "price_tick", "size"]


def ingest_events(path) -> list[EventRecord]:
    """Parse and validate an event CSV; timestamps must be non-decreasing.

    Records with equal timestamps keep their file order (stable).  Raises
    ParseError with the offending 1-based line number, or
    MonotonicityError when a timestamp decreases.
    """
    records: list[EventRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", line_no=1) from None
        if header != _HEADER:
            raise ParseError(f"expected header {','.join(_HEADER)}", line_no=1)
        prev_ts = None
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise ParseError(f"expected 5 fields, got {len(row)}", line_no)
            try:
                ts = int(row[0])
                ev = EventType(row[1])
                side = Side(row[2])
                tick = int(row[3])
                size = int(row[4])
            except (ValueError, KeyError) as exc:
                raise ParseError(str(exc), line_no) from None
            if size < 1:
                raise ParseError(f"size must be >= 1, got {size}", line_no)
            if prev_ts is not None and ts < prev_ts:
                raise MonotonicityError(
                    f"line {line_no}: timestamp {ts} decreases below {prev_ts}"
                )
            prev_ts = ts
            records.append(EventRecord(ts, ev, side, tick, size))
    return records


def write_events(path, records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_HEADER)
        for r in records:
            writer.writerow([r.ts_ms, r.event.value, r.side.value, r.price_tick, r.size])


def _replay_event(eng, rec: EventRecord, seq: int) -> int:
    """Apply one event with matching-engine semantics (no window bounds).

    A cancel removes the oldest order at its level; cancelling an absent
    order is a replay inconsistency.  A market order's unfilled remainder
    is discarded.
    """
    side = BID if rec.side == Side.Bid else ASK
    if rec.event == EventType.LimitOrder:
        eng.limit(side, rec.price_tick, rec.size, seq)
        return seq + 1
    if rec.event == EventType.Cancel:
        removed, _ = eng.cancel_oldest(side, rec.price_tick, 1)
        if removed != 1:
            raise ReplayError(
                f"cancel of absent order at tick {rec.price_tick} "
                f"({rec.side.value}, ts {rec.ts_ms})"
            )
        return seq
    eng.market(side, rec.size)
    return seq


def events_to_snapshots(
    events,
    interval_seconds: int = 10,
    l_p: int = 5,
    l_d: int = 3,
    backend_kind: str | None = None,
) -> DaySnapshotSeries:
    """Replay an event stream and sample the book at interval boundaries.

    Snapshot k describes the state after all events with
    ``ts_ms < k * interval_seconds * 1000``; snapshot 0 is the (empty)
    initial state.  Reference prices re-anchor at each boundary and are
    retained from the previous boundary when a side is empty.
    """
    if interval_seconds < 1:
        raise InvalidConfig("interval_seconds must be >= 1")
    events = list(events)
    interval_ms = interval_seconds * 1000
    n_intervals = (
        0 if not events else int(events[-1].ts_ms // interval_ms) + 1
    )
    l_t = l_p + l_d
    k_max = n_intervals
    snap = SnapshotSeries(
        interval_seconds=interval_seconds,
        l_p=l_p,
        l_d=l_d,
        best_bid=np.full(k_max + 1, -1, dtype=np.int64),
        best_ask=np.full(k_max + 1, -1, dtype=np.int64),
        ref_bid=np.zeros(k_max + 1, dtype=np.int64),
        ref_ask=np.zeros(k_max + 1, dtype=np.int64),
        bid_counts=np.zeros((k_max + 1, l_t), dtype=np.int64),
        ask_counts=np.zeros((k_max + 1, l_t), dtype=np.int64),
        bid_shares=np.zeros((k_max + 1, l_t), dtype=np.int64),
        ask_shares=np.zeros((k_max + 1, l_t), dtype=np.int64),
        bid_exterior_shares=np.zeros(k_max + 1, dtype=np.int64),
        ask_exterior_shares=np.zeros(k_max + 1, dtype=np.int64),
    )
    eng = backend.make_engine(backend_kind)
    s_values = np.arange(-l_d + 1, l_p + 1)
    ref_bid = ref_ask = 0

    def record(k):
        nonlocal ref_bid, ref_ask
        bb, ba = eng.best(BID), eng.best(ASK)
        if bb is not None:
            ref_bid = bb
        if ba is not None:
            ref_ask = ba
        snap.best_bid[k] = -1 if bb is None else bb
        snap.best_ask[k] = -1 if ba is None else ba
        snap.ref_bid[k] = ref_bid
        snap.ref_ask[k] = ref_ask
        bt = ref_ask - s_values
        at = ref_bid + s_values
        snap.bid_counts[k] = eng.counts_at(BID, bt)
        snap.ask_counts[k] = eng.counts_at(ASK, at)
        snap.bid_shares[k] = eng.shares_at(BID, bt)
        snap.ask_shares[k] = eng.shares_at(ASK, at)
        snap.bid_exterior_shares[k] = eng.total_shares(BID) - int(snap.bid_shares[k].sum())
        snap.ask_exterior_shares[k] = eng.total_shares(ASK) - int(snap.ask_shares[k].sum())

    record(0)
    seq = 0
    k = 1
    for rec in events:
        while k <= k_max and rec.ts_ms >= k * interval_ms:
            record(k)
            k += 1
        seq = _replay_event(eng, rec, seq)
    while k <= k_max:
        record(k)
        k += 1
    return snap


@dataclass
class CorrelationResult:
    """Pearson correlations of per-interval submission counts by level."""

    matrix: np.ndarray
    levels: np.ndarray  # retained relative levels, ascending
    excluded: np.ndarray  # zero-variance levels left out
    n_intervals: int


def intensity_correlation(
    events,
    interval_seconds: int = 10,
    l_p: int = 5,
    l_d: int = 3,
    side: str = "bid",
    backend_kind: str | None = None,
) -> CorrelationResult:
    """Correlation matrix of limit-order submission counts per level.

    Levels are attributed against the interval-start reference prices
    (bid levels relative to the ask reference and vice versa); submissions
    outside the modelled window are pooled into overflow buckets that do
    not enter the matrix.  Zero-variance levels are excluded and reported.
    """
    if side not in ("bid", "ask"):
        raise InvalidConfig("side must be 'bid' or 'ask'")
    events = list(events)
    interval_ms = interval_seconds * 1000
    n_intervals = 0 if not events else int(events[-1].ts_ms // interval_ms) + 1
    if n_intervals < 30:
        raise InvalidConfig("need at least 30 intervals for correlations")
    l_t = l_p + l_d
    want_side = Side.Bid if side == "bid" else Side.Ask
    counts = np.zeros((n_intervals, l_t), dtype=np.int64)
    eng = backend.make_engine(backend_kind)
    ref_bid = ref_ask = 0
    current = -1
    seq = 0
    for rec in events:
        k = int(rec.ts_ms // interval_ms)
        while current < k:
            current += 1
            bb, ba = eng.best(BID), eng.best(ASK)
            if bb is not None:
                ref_bid = bb
            if ba is not None:
                ref_ask = ba
        if rec.event == EventType.LimitOrder and rec.side == want_side:
            if want_side == Side.Bid:
                s = ref_ask - rec.price_tick
            else:
                s = rec.price_tick - ref_bid
            i = s + l_d - 1
            if 0 <= i < l_t:
                counts[k, i] += 1
        seq = _replay_event(eng, rec, seq)
    variances = counts.var(axis=0)
    keep = variances > 0
    levels = np.arange(-l_d + 1, l_p + 1)
    if not np.any(keep):
        raise DegenerateLevel("all levels have zero count variance")
    matrix = np.corrcoef(counts[:, keep], rowvar=False)
    matrix = np.atleast_2d(matrix)
    return CorrelationResult(
        matrix=matrix,
        levels=levels[keep],
        excluded=levels[~keep],
        n_intervals=n_intervals,
    )


@dataclass
class SizeHistogram:
    bin_edges: np.ndarray  # len(counts) + 1, integer edges
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def order_size_histogram(events, bin_width: int = 1) -> SizeHistogram:
    """Histogram of limit-order sizes with integer bins of ``bin_width``.

    Bin i covers sizes [1 + i*w, (i+1)*w].
    """
    if bin_width < 1:
        raise InvalidConfig("bin width must be >= 1")
    sizes = [r.size for r in events if r.event == EventType.LimitOrder]
    if not sizes:
        raise InvalidConfig("no limit order events")
    sizes = np.asarray(sizes, dtype=np.int64)
    n_bins = int((sizes.max() - 1) // bin_width) + 1
    edges = 1 + bin_width * np.arange(n_bins + 1, dtype=np.int64)
    idx = (sizes - 1) // bin_width
    counts = np.bincount(idx, minlength=n_bins).astype(np.int64)
    return SizeHistogram(bin_edges=edges, counts=counts)


# ----------------------------------------------------------------------
# simulated-day persistence: snapshot CSV + JSON metadata header


def _level_columns(l_p: int, l_d: int) -> list[str]:
    cols = []
    for prefix in ("bid_count", "ask_count", "bid_shares", "ask_shares"):
        for s in range(-l_d + 1, l_p + 1):
            cols.append(f"{prefix}_s{s}")
    return cols


_REALISED_COLS = [
    "lo_bid",
    "lo_ask",
    "cancel_bid",
    "cancel_ask",
    "mo_buy",
    "mo_sell",
    "mo_exec_shares_buy",
    "mo_exec_shares_sell",
]


def write_sim_result(result: SimResult, csv_path, json_path) -> None:
    """Columnar CSV (one row per interval boundary) plus JSON metadata.

    Row t holds the interval-t boundary snapshot and the realised event
    counts of interval t (zeros at t = 0).  All values are integers, so
    the round-trip is bit-exact.
    """
    snaps = result.snapshots
    l_p, l_d = snaps.l_p, snaps.l_d
    levels = list(range(-l_d + 1, l_p + 1))
    header = (
        ["t", "time_s", "best_bid", "best_ask", "ref_bid", "ref_ask"]
        + _level_columns(l_p, l_d)
        + ["bid_exterior_shares", "ask_exterior_shares"]
        + _REALISED_COLS
    )
    r = result.realised
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t in range(snaps.n_snapshots):
            row = [
                t,
                t * snaps.interval_seconds,
                int(snaps.best_bid[t]),
                int(snaps.best_ask[t]),
                int(snaps.ref_bid[t]),
                int(snaps.ref_ask[t]),
            ]
            row += [int(v) for v in snaps.bid_counts[t]]
            row += [int(v) for v in snaps.ask_counts[t]]
            row += [int(v) for v in snaps.bid_shares[t]]
            row += [int(v) for v in snaps.ask_shares[t]]
            row += [int(snaps.bid_exterior_shares[t]), int(snaps.ask_exterior_shares[t])]
            if t == 0:
                row += [0] * len(_REALISED_COLS)
            else:
                k = t - 1
                row += [
                    int(r["lo_counts"][k, BID]),
                    int(r["lo_counts"][k, ASK]),
                    int(r["cancelled_counts"][k, BID].sum()),
                    int(r["cancelled_counts"][k, ASK].sum()),
                    int(r["mo_counts"][k, BID]),
                    int(r["mo_counts"][k, ASK]),
                    int(r["mo_exec_shares"][k, BID]),
                    int(r["mo_exec_shares"][k, ASK]),
                ]
            writer.writerow(row)
    meta = {
        "format": "lobforge-sim-result-v1",
        "theta": result.theta.to_json_dict(),
        "config": result.config.to_json_dict(),
        "seed": result.config.seed,
        "l_p": l_p,
        "l_d": l_d,
        "interval_seconds": snaps.interval_seconds,
        "levels": levels,
    }
    with open(json_path, "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_snapshot_csv(csv_path) -> SnapshotSeries:
    """Rebuild a snapshot series from the CSV alone (levels and interval
    length are recovered from the header and the time column)."""
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", line_no=1) from None
        level_cols = [c for c in header if c.startswith("bid_count_s")]
        if not level_cols:
            raise ParseError("no level columns found", line_no=1)
        levels = sorted(int(c.removeprefix("bid_count_s")) for c in level_cols)
        l_d = 1 - levels[0]
        l_p = levels[-1]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rows.append([int(v) for v in row])
            except ValueError as exc:
                raise ParseError(str(exc), line_no) from None
    if len(rows) < 2:
        raise ParseError("need at least two snapshot rows")
    data = np.asarray(rows, dtype=np.int64)
    col = {name: i for i, name in enumerate(header)}
    interval_seconds = int(data[1, col["time_s"]] - data[0, col["time_s"]])
    l_t = l_p + l_d

    def block(prefix):
        idx = [col[f"{prefix}_s{s}"] for s in range(-l_d + 1, l_p + 1)]
        return data[:, idx]

    return SnapshotSeries(
        interval_seconds=interval_seconds,
        l_p=l_p,
        l_d=l_d,
        best_bid=data[:, col["best_bid"]],
        best_ask=data[:, col["best_ask"]],
        ref_bid=data[:, col["ref_bid"]],
        ref_ask=data[:, col["ref_ask"]],
        bid_counts=block("bid_count"),
        ask_counts=block("ask_count"),
        bid_shares=block("bid_shares"),
        ask_shares=block("ask_shares"),
        bid_exterior_shares=data[:, col["bid_exterior_shares"]],
        ask_exterior_shares=data[:, col["ask_exterior_shares"]],
    )


def read_sim_result(csv_path, json_path) -> tuple[SnapshotSeries, dict, dict]:
    """Read back a persisted day: snapshots, realised columns, metadata."""
    snaps = read_snapshot_csv(csv_path)
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        col = {name: i for i, name in enumerate(header)}
        data = np.asarray([[int(v) for v in row] for row in reader if row], dtype=np.int64)
    realised = {name: data[1:, col[name]] for name in _REALISED_COLS}
    with open(json_path) as fh:
        meta = json.load(fh)
    return snaps, realised, meta
