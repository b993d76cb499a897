"""The core sweep: eager and lazy interval-timestamp joins.

Both engines interleave two sorted endpoint streams.  Endpoints of the
outer relation maintain the active tuple set (Start inserts, End removes
tolerantly); every endpoint of the inner relation triggers output pairs
against the active set.  The comparator decides which side is handled first
on equal endpoints, which is what encodes the <= versus < predicate flavor.

The lazy engine additionally buffers runs of consecutive inner endpoints so
one scan of the active set serves the whole run.

When both iterators can drain to in-memory lists, a tighter loop over the
lists is used; stream-fed iterators fall back to stepwise pulling with
identical semantics, emitting each pair as soon as its trigger arrives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from .core import ComparatorKind, EndpointKind, IntervalTuple, Relation, SweepJoinError
from .iterators import EndpointIterator, IndexIterator

#: Default lazy buffer capacity: 2048 twelve-byte tuples stay well under a
#: 32 KB L1d cache.
DEFAULT_CAPACITY = 2048


class DuplicateActiveTupleError(SweepJoinError):
    """A Start event arrived for a tuple id already in the active set."""


@dataclass
class JoinStats:
    """Instrumentation counters for one engine run.

    getnext_count: active-set element fetches (one per active tuple per
    scan).  comparison_count: tuple-attribute comparisons done by filtering
    consumers.  output_count: pairs handed to the consumer before any
    residual filter.  buffer_flushes: lazy buffer drains (0 for the eager
    engine).  endpoint_comparisons: comparator invocations in the main loop.
    """

    getnext_count: int = 0
    comparison_count: int = 0
    output_count: int = 0
    buffer_flushes: int = 0
    endpoint_comparisons: int = 0


class ResultPair(NamedTuple):
    """One join result: the two tuple ids plus the sweep position at which
    the pair became known (the timestamp of the triggering inner endpoint)."""

    r_id: int
    s_id: int
    emitted_at: int


class PairCollector:
    """Consumer that records every pair as a ResultPair."""

    def __init__(self):
        self.pairs: List[ResultPair] = []

    def __call__(self, r: IntervalTuple, s: IntervalTuple, at: int) -> None:
        self.pairs.append(ResultPair(r.id, s.id, at))

    def pair_set(self) -> set:
        return {(p.r_id, p.s_id) for p in self.pairs}


class FilteringConsumer:
    """Applies a residual selection predicate before forwarding a pair.

    The predicate returns (holds, ncomparisons); the comparison tally is
    accumulated on the consumer and picked up by the engine's stats.
    """

    def __init__(self, predicate: Callable, inner: Callable):
        self.predicate = predicate
        self.inner = inner
        self.comparisons = 0

    def __call__(self, r: IntervalTuple, s: IntervalTuple, at: int) -> None:
        ok, n = self.predicate(r, s)
        self.comparisons += n
        if ok:
            self.inner(r, s, at)


class ReversingConsumer:
    """Restores (r, s) pair order for joins run with swapped arguments."""

    def __init__(self, inner: Callable):
        self.inner = inner

    def __call__(self, s: IntervalTuple, r: IntervalTuple, at: int) -> None:
        self.inner(r, s, at)


class TeeConsumer:
    """Forwards every pair to two downstream consumers."""

    def __init__(self, first: Callable, second: Callable):
        self.first = first
        self.second = second

    def __call__(self, r: IntervalTuple, s: IntervalTuple, at: int) -> None:
        self.first(r, s, at)
        self.second(r, s, at)


class ChecksumConsumer:
    """Accumulates sum(r.ts + s.ts) and the pair count without storing pairs.

    Implements the optional streaming hooks (on_insert / on_remove /
    consume_block) so the engines can aggregate a whole buffer flush in
    O(active + buffered) instead of per pair: the running sum over the
    active set is maintained incrementally as tuples enter and leave.
    """

    def __init__(self):
        self.total = 0
        self.count = 0
        self._active_sum = 0
        self._active_count = 0

    def __call__(self, r: IntervalTuple, s: IntervalTuple, at: int) -> None:
        self.total += r.ts + s.ts
        self.count += 1

    def on_insert(self, r: IntervalTuple) -> None:
        self._active_sum += r.ts
        self._active_count += 1

    def on_remove(self, r: IntervalTuple) -> None:
        self._active_sum -= r.ts
        self._active_count -= 1

    def consume_block(self, active, batch_s, batch_at) -> None:
        m = len(batch_s)
        self.total += m * self._active_sum + self._active_count * sum(
            s[1] for s in batch_s
        )
        self.count += m * self._active_count

    def outer_weights(self, rel_r: Relation):
        return rel_r.bounds()[0]

    def consume_columnar(self, counts, weight_sums, s_tids, s_at, rel_s) -> None:
        s_ts = rel_s.bounds()[0]
        self.total += int(weight_sums.sum()) + int((counts * s_ts[s_tids]).sum())
        self.count += int(counts.sum())


def collect_comparisons(consumer) -> int:
    """Sum the comparison tallies along a consumer decorator chain."""
    total = 0
    while consumer is not None:
        total += getattr(consumer, "comparisons", 0)
        consumer = getattr(consumer, "inner", None)
    return total


def join_by_s(
    rel_r: Relation,
    rel_s: Relation,
    it_r: EndpointIterator,
    it_s: EndpointIterator,
    comp: ComparatorKind,
    consumer: Callable,
) -> JoinStats:
    """Eager sweep: every inner endpoint scans the active set immediately."""
    return _sweep(rel_r, rel_s, it_r, it_s, comp, consumer, 1, True)


def lazy_join_by_s(
    rel_r: Relation,
    rel_s: Relation,
    it_r: EndpointIterator,
    it_s: EndpointIterator,
    comp: ComparatorKind,
    consumer: Callable,
    capacity: int = DEFAULT_CAPACITY,
) -> JoinStats:
    """Buffering sweep: runs of inner endpoints uninterrupted by outer
    events share one active-set scan (outer loop over active tuples, inner
    loop over the buffer).  Produces the same pair set as join_by_s."""
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    return _sweep(rel_r, rel_s, it_r, it_s, comp, consumer, capacity, False)


def compute_gnorf(eager: JoinStats, lazy: JoinStats) -> float:
    """Fetch-reduction ratio between an eager and a lazy run of one join."""
    if eager.output_count != lazy.output_count:
        raise SweepJoinError(
            "inconsistent runs: output counts "
            f"{eager.output_count} vs {lazy.output_count}"
        )
    if eager.getnext_count == 0 and lazy.getnext_count == 0:
        return 1.0
    return eager.getnext_count / lazy.getnext_count


def _sweep(rel_r, rel_s, it_r, it_s, comp, consumer, capacity, eager):
    before = collect_comparisons(consumer)
    limit = 1 if comp is ComparatorKind.NON_STRICT else 0
    if hasattr(consumer, "consume_columnar") and hasattr(consumer, "outer_weights"):
        # Aggregate pushdown: a consumer that only needs per-scan active
        # counts and weight sums lets the whole sweep run as array math.
        # drain_columns is side-effect free, so failing over is safe.
        cr = it_r.drain_columns()
        cs = it_s.drain_columns() if cr is not None else None
        if cr is not None and cs is not None:
            stats = _sweep_columnar(
                rel_r, rel_s, cr, cs, limit, consumer, capacity, eager
            )
            if stats is not None:
                stats.comparison_count = collect_comparisons(consumer) - before
                return stats
    er = it_r.drain()
    es = it_s.drain()
    if er is None or es is None:
        if er is not None:
            it_r = IndexIterator(er)
        if es is not None:
            it_s = IndexIterator(es)
        stats = _sweep_pull(rel_r, rel_s, it_r, it_s, comp, consumer, capacity, eager)
    else:
        stats = _sweep_lists(rel_r, rel_s, er, es, comp, consumer, capacity, eager)
    stats.comparison_count = collect_comparisons(consumer) - before
    return stats


def _sweep_columnar(rel_r, rel_s, cr, cs, limit, consumer, capacity, eager):
    """Array-math sweep for aggregate-only consumers.

    Replays the exact event order of the stepwise engines (including the
    tie-breaking comparator, encoded as a sort key) and hands the consumer
    one vector of active-set counts and weight sums per inner event.
    Returns None when the outer stream is not a clean one-start-one-end
    sequence per id; the caller then falls back to the stepwise loop,
    which has per-event semantics for such streams.
    """
    rts, rkind, rtid = cr
    sts, skind, stid = cs
    nr, ns = len(rts), len(sts)
    if nr == 0 or ns == 0:
        return JoinStats()
    is_start = rkind == int(EndpointKind.START)
    start_tids = rtid[is_start]
    end_tids = rtid[~is_start]
    if len(np.unique(start_tids)) != len(start_tids):
        return None
    if len(np.unique(end_tids)) != len(end_tids):
        return None
    pos = np.arange(nr, dtype=np.int64)
    start_pos = np.full(len(rel_r.tuples), -1, np.int64)
    start_pos[start_tids] = pos[is_start]
    sp = start_pos[end_tids]
    if not np.all((sp >= 0) & (sp < pos[~is_start])):
        return None

    weights = consumer.outer_weights(rel_r)
    ts_all = np.concatenate([rts, sts])
    kind_all = np.concatenate([rkind, skind])
    r_side = 1 - limit  # outer first on ties only under the non-strict rule
    side = np.concatenate([
        np.full(nr, r_side, np.int64), np.full(ns, limit, np.int64),
    ])
    order = np.lexsort((side, kind_all, ts_all))
    is_r = order < nr

    sign = np.where(is_start, 1, -1)  # per outer event, in source order
    delta = np.zeros(nr + ns, np.int64)
    delta[is_r] = sign  # stable sort keeps each side's own order
    counts = np.cumsum(delta)
    wdelta = np.zeros(nr + ns, np.int64)
    wdelta[is_r] = sign * weights[rtid]
    wsums = np.cumsum(wdelta)

    s_sel = ~is_r
    before_r = np.cumsum(is_r)[s_sel]  # outer events handled first
    # Inner events after the last outer event are never scanned.
    proc = before_r < nr
    cnt = counts[s_sel][proc]
    if len(cnt) == 0:
        return JoinStats()
    wsum = wsums[s_sel][proc]
    inner_idx = order[s_sel][proc] - nr
    consumer.consume_columnar(cnt, wsum, stid[inner_idx], sts[inner_idx], rel_s)

    # One flush per run of uninterrupted inner events, split at capacity.
    br = before_r[proc]
    m = len(br)
    newrun = np.empty(m, bool)
    newrun[0] = True
    np.not_equal(br[1:], br[:-1], out=newrun[1:])
    run_start = np.flatnonzero(newrun)
    run_id = np.cumsum(newrun) - 1
    pos_in_run = np.arange(m, dtype=np.int64) - run_start[run_id]
    first = pos_in_run % capacity == 0
    flushes = int(first.sum())
    return JoinStats(
        int(cnt[first].sum()), 0, int(cnt.sum()),
        0 if eager else flushes, 0,
    )


def _sweep_lists(rel_r, rel_s, er, es, comp, consumer, capacity, eager):
    active: dict = {}
    values = active.values()
    rtuples = rel_r.tuples
    stuples = rel_s.tuples
    on_insert = getattr(consumer, "on_insert", None)
    on_remove = getattr(consumer, "on_remove", None)
    block = getattr(consumer, "consume_block", None)
    # comp as an inlined integer test: outer side goes first iff its endpoint
    # is strictly less, or equal and the comparator is non-strict.
    limit = 1 if comp is ComparatorKind.NON_STRICT else 0
    i = j = 0
    nr = len(er)
    ns = len(es)
    getnext = out = flushes = ecomp = 0
    while i < nr and j < ns:
        a = er[i]
        b = es[j]
        ecomp += 1
        if a[0] < b[0] or (a[0] == b[0] and a[1] < b[1] + limit):
            tid = a[2]
            if a[1]:
                if tid in active:
                    raise DuplicateActiveTupleError(f"tuple id {tid} inserted twice")
                active[tid] = r = rtuples[tid]
                if on_insert is not None:
                    on_insert(r)
            else:
                r = active.pop(tid, None)
                if r is not None and on_remove is not None:
                    on_remove(r)
            i += 1
        else:
            batch_s = [stuples[b[2]]]
            batch_at = [b[0]]
            j += 1
            while j < ns and len(batch_s) < capacity:
                b = es[j]
                if i < nr:
                    a = er[i]
                    ecomp += 1
                    if a[0] < b[0] or (a[0] == b[0] and a[1] < b[1] + limit):
                        break
                batch_s.append(stuples[b[2]])
                batch_at.append(b[0])
                j += 1
            flushes += 1
            na = len(active)
            getnext += na
            out += na * len(batch_s)
            if block is not None:
                block(values, batch_s, batch_at)
            elif na:
                m = len(batch_s)
                for r in values:
                    for idx in range(m):
                        consumer(r, batch_s[idx], batch_at[idx])
    return JoinStats(getnext, 0, out, 0 if eager else flushes, ecomp)


def _sweep_pull(rel_r, rel_s, it_r, it_s, comp, consumer, capacity, eager):
    active: dict = {}
    values = active.values()
    rtuples = rel_r.tuples
    stuples = rel_s.tuples
    on_insert = getattr(consumer, "on_insert", None)
    on_remove = getattr(consumer, "on_remove", None)
    block = getattr(consumer, "consume_block", None)
    start = EndpointKind.START
    getnext = out = flushes = ecomp = 0
    while not it_r.is_finished() and not it_s.is_finished():
        a = it_r.get_endpoint()
        b = it_s.get_endpoint()
        ecomp += 1
        if comp.holds(a, b):
            tid = a.tuple_id
            if a.kind == start:
                if tid in active:
                    raise DuplicateActiveTupleError(f"tuple id {tid} inserted twice")
                active[tid] = r = rtuples[tid]
                if on_insert is not None:
                    on_insert(r)
            else:
                r = active.pop(tid, None)
                if r is not None and on_remove is not None:
                    on_remove(r)
            it_r.move_to_next()
        else:
            batch_s = []
            batch_at = []
            while True:
                batch_s.append(stuples[b.tuple_id])
                batch_at.append(b.timestamp)
                it_s.move_to_next()
                if it_s.is_finished() or len(batch_s) >= capacity:
                    break
                b = it_s.get_endpoint()
                if not it_r.is_finished():
                    ecomp += 1
                    if comp.holds(it_r.get_endpoint(), b):
                        break
            flushes += 1
            na = len(active)
            getnext += na
            out += na * len(batch_s)
            if block is not None:
                block(values, batch_s, batch_at)
            elif na:
                m = len(batch_s)
                for r in values:
                    for idx in range(m):
                        consumer(r, batch_s[idx], batch_at[idx])
    return JoinStats(getnext, 0, out, 0 if eager else flushes, ecomp)
