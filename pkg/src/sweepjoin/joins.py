"""Join plans for every supported interval relation.

Each relation is reduced to the same sweep primitive by rewriting one input
into a virtual endpoint stream (shifting, filtering, merging, and picking
per-tuple endpoints) and optionally post-filtering pairs with a cheap
residual comparison.  The active-set condition the sweep evaluates is
always "the inner endpoint falls inside the (virtual) outer interval";
everything else is encoded in the rewrite and the tie-breaking comparator.

Relations whose roles are mirrored (the inverse and *-by variants) run the
primal plan with swapped inputs and restore pair order on output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Set, Tuple

from .core import (
    INF,
    ComparatorKind,
    EndpointIndex,
    EndpointKind,
    IntervalRelation,
    PredicateSpec,
    Relation,
    build_endpoint_index,
)
from .engine import (
    DEFAULT_CAPACITY,
    FilteringConsumer,
    JoinStats,
    PairCollector,
    ReversingConsumer,
    join_by_s,
    lazy_join_by_s,
)
from .iterators import (
    EndpointIterator,
    FilteringIterator,
    FirstEndIterator,
    IndexIterator,
    MergingIterator,
    SecondStartIterator,
    ShiftingIterator,
    StreamSource,
)

_R = IntervalRelation
_START = EndpointKind.START
_END = EndpointKind.END

#: Mirrored relations: run the primal plan with swapped inputs.
_INVERSE = {
    _R.INV_START_PRECEDING: _R.START_PRECEDING,
    _R.INV_END_FOLLOWING: _R.END_FOLLOWING,
    _R.INV_BEFORE: _R.BEFORE,
    _R.ALLEN_AFTER: _R.ALLEN_BEFORE,
    _R.ALLEN_MET_BY: _R.ALLEN_MEETS,
    _R.ALLEN_OVERLAPPED_BY: _R.ALLEN_OVERLAPS,
    _R.ALLEN_CONTAINS: _R.ALLEN_DURING,
    _R.ALLEN_STARTED_BY: _R.ALLEN_STARTS,
    _R.ALLEN_FINISHED_BY: _R.ALLEN_FINISHES,
}


def _cursor(src) -> EndpointIterator:
    """A fresh cursor over an endpoint source.

    Accepts an EndpointIndex (or raw event list), a StreamSource (which
    hands out independent replay cursors), or an already-built iterator.
    Plans that need several passes over one input require the first two.
    """
    if isinstance(src, EndpointIndex):
        return IndexIterator(src)
    if isinstance(src, StreamSource):
        return src.cursor()
    if isinstance(src, EndpointIterator):
        return src
    return IndexIterator(src)


def _run(rel_r, rel_s, it_r, it_s, comp, consumer, engine, capacity):
    if engine == "eager":
        return join_by_s(rel_r, rel_s, it_r, it_s, comp, consumer)
    if engine == "lazy":
        return lazy_join_by_s(rel_r, rel_s, it_r, it_s, comp, consumer, capacity)
    raise ValueError(f"unknown engine {engine!r}")


def _start_preceding_iters(src_r, delta, strict):
    """Outer stream and comparator for the start-preceding family.

    Relaxed: the plain outer index; the inner Start falls in [Ts, Te).
    Bounded: each outer interval is clipped to [Ts, min(Te, Ts + delta + 1))
    by merging in a shifted copy of its Start as a second End and keeping
    only the earlier End per tuple.
    """
    comp = ComparatorKind.STRICT if strict else ComparatorKind.NON_STRICT
    if delta is None:
        return _cursor(src_r), comp
    clip = ShiftingIterator(FilteringIterator(_cursor(src_r), _START), delta + 1, _END)
    return FirstEndIterator(MergingIterator(_cursor(src_r), clip)), comp


def _end_following_iters(src_r, epsilon, strict):
    """Outer stream and comparator for the end-following family.

    The inner event is an End, so the comparator roles flip: STRICT keeps
    an outer interval active through a tying End (inclusive upper bound),
    NON_STRICT closes it first (strict flavor).  Bounded: each outer
    interval is clipped to [max(Ts, Te - epsilon - 1), Te) by merging in a
    shifted copy of its End as a second Start and keeping the later one.
    """
    comp = ComparatorKind.NON_STRICT if strict else ComparatorKind.STRICT
    if epsilon is None:
        return _cursor(src_r), comp
    clip = ShiftingIterator(FilteringIterator(_cursor(src_r), _END), -epsilon - 1, _START)
    return SecondStartIterator(MergingIterator(_cursor(src_r), clip)), comp


def start_preceding(rel_r, rel_s, src_r, src_s, consumer, *,
                    delta=None, strict=False,
                    engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    it_r, comp = _start_preceding_iters(src_r, delta, strict)
    it_s = FilteringIterator(_cursor(src_s), _START)
    return _run(rel_r, rel_s, it_r, it_s, comp, consumer, engine, capacity)


def end_following(rel_r, rel_s, src_r, src_s, consumer, *,
                  epsilon=None, strict=False,
                  engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    it_r, comp = _end_following_iters(src_r, epsilon, strict)
    it_s = FilteringIterator(_cursor(src_s), _END)
    return _run(rel_r, rel_s, it_r, it_s, comp, consumer, engine, capacity)


def general_before(rel_r, rel_s, src_r, src_s, consumer, *,
                   beta=0, delta=None,
                   engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    """r ends at least beta and at most delta before s starts.

    Each outer interval is replaced by the virtual gap window
    [Te + beta, Te + delta + 1); the inner Start must fall inside it.
    beta = 0 allows touching intervals, beta = 1 forbids them, so this one
    plan covers the meets, bounded-before and strictly-before relations.
    """
    if delta is not None and delta < beta:
        # Empty window; the virtual End would sort before its Start.
        return JoinStats()
    lo = ShiftingIterator(FilteringIterator(_cursor(src_r), _END), beta, _START)
    hi = ShiftingIterator(
        FilteringIterator(_cursor(src_r), _END),
        INF if delta is None else delta + 1,
        _END,
    )
    it_s = FilteringIterator(_cursor(src_s), _START)
    return _run(rel_r, rel_s, MergingIterator(lo, hi), it_s,
                ComparatorKind.NON_STRICT, consumer, engine, capacity)


def _same_start_iters(src_r):
    # Virtual outer interval [Ts, Ts + 1): the inner Start must equal Ts.
    starts = FilteringIterator(_cursor(src_r), _START)
    close = ShiftingIterator(FilteringIterator(_cursor(src_r), _START), 1, _END)
    return MergingIterator(starts, close)


def equals_join(rel_r, rel_s, src_r, src_s, consumer, *,
                engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    it_s = FilteringIterator(_cursor(src_s), _START)
    chain = FilteringConsumer(lambda r, s: (r.te == s.te, 1), consumer)
    return _run(rel_r, rel_s, _same_start_iters(src_r), it_s,
                ComparatorKind.NON_STRICT, chain, engine, capacity)


def starts_join(rel_r, rel_s, src_r, src_s, consumer, *,
                engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    it_s = FilteringIterator(_cursor(src_s), _START)
    chain = FilteringConsumer(lambda r, s: (r.te < s.te, 1), consumer)
    return _run(rel_r, rel_s, _same_start_iters(src_r), it_s,
                ComparatorKind.NON_STRICT, chain, engine, capacity)


def finishes_join(rel_r, rel_s, src_r, src_s, consumer, *,
                  engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    # Virtual outer interval [Te - 1, Te): the inner End must equal Te.
    open_ = ShiftingIterator(FilteringIterator(_cursor(src_r), _END), -1, _START)
    close = FilteringIterator(_cursor(src_r), _END)
    it_s = FilteringIterator(_cursor(src_s), _END)
    chain = FilteringConsumer(lambda r, s: (s.ts < r.ts, 1), consumer)
    return _run(rel_r, rel_s, MergingIterator(open_, close), it_s,
                ComparatorKind.STRICT, chain, engine, capacity)


def _end_order_filter(strict, epsilon):
    # r must end no later than s (strictly earlier when strict), optionally
    # by at most epsilon.
    if epsilon is None:
        if strict:
            return lambda r, s: (r.te < s.te, 1)
        return lambda r, s: (r.te <= s.te, 1)

    def pred(r, s):
        if (r.te >= s.te) if strict else (r.te > s.te):
            return False, 1
        return s.te - r.te <= epsilon, 2
    return pred


def _start_order_filter(strict, delta):
    # s must start no later than r (strictly earlier when strict), optionally
    # by at most delta.
    if delta is None:
        if strict:
            return lambda r, s: (s.ts < r.ts, 1)
        return lambda r, s: (s.ts <= r.ts, 1)

    def pred(r, s):
        if (s.ts >= r.ts) if strict else (s.ts > r.ts):
            return False, 1
        return r.ts - s.ts <= delta, 2
    return pred


def left_overlap(rel_r, rel_s, src_r, src_s, consumer, *,
                 delta=None, epsilon=None, strict=False,
                 engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    it_r, comp = _start_preceding_iters(src_r, delta, strict)
    it_s = FilteringIterator(_cursor(src_s), _START)
    chain = FilteringConsumer(_end_order_filter(strict, epsilon), consumer)
    return _run(rel_r, rel_s, it_r, it_s, comp, chain, engine, capacity)


def right_overlap(rel_r, rel_s, src_r, src_s, consumer, *,
                  delta=None, epsilon=None, strict=False,
                  engine="lazy", capacity=DEFAULT_CAPACITY) -> JoinStats:
    it_r, comp = _end_following_iters(src_r, epsilon, strict)
    it_s = FilteringIterator(_cursor(src_s), _END)
    chain = FilteringConsumer(_start_order_filter(strict, delta), consumer)
    return _run(rel_r, rel_s, it_r, it_s, comp, chain, engine, capacity)


def during(rel_r, rel_s, src_r, src_s, consumer, *,
           delta=None, epsilon=None, strict=False,
           engine="lazy", capacity=DEFAULT_CAPACITY,
           formulation="start") -> JoinStats:
    """r lies inside s; runs with swapped roles, s as the sweep outer side.

    The start formulation sweeps r's Starts through s's intervals (delta is
    enforced by the rewrite, epsilon by the residual filter); the end
    formulation sweeps r's Ends and swaps the parameter roles.  Both yield
    identical pairs.
    """
    if formulation == "start":
        it_outer, comp = _start_preceding_iters(src_s, delta, strict)
        it_inner = FilteringIterator(_cursor(src_r), _START)
        # Swapped args: the filter sees (s, r).
        end_pred = _end_order_filter(strict, epsilon)
        pred = lambda s, r: end_pred(r, s)
    elif formulation == "end":
        it_outer, comp = _end_following_iters(src_s, epsilon, strict)
        it_inner = FilteringIterator(_cursor(src_r), _END)
        start_pred = _start_order_filter(strict, delta)
        pred = lambda s, r: start_pred(r, s)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    chain = FilteringConsumer(pred, ReversingConsumer(consumer))
    return _run(rel_s, rel_r, it_outer, it_inner, comp, chain, engine, capacity)


def reverse_during(rel_r, rel_s, src_r, src_s, consumer, *,
                   delta=None, epsilon=None, strict=False,
                   engine="lazy", capacity=DEFAULT_CAPACITY,
                   formulation="start") -> JoinStats:
    """s lies inside r; the unswapped mirror of ``during``."""
    if formulation == "start":
        it_r, comp = _start_preceding_iters(src_r, delta, strict)
        it_s = FilteringIterator(_cursor(src_s), _START)
        # Mirrored end condition: s ends inside r, within epsilon of r's end.
        end_pred = _end_order_filter(strict, epsilon)
        pred = lambda r, s: end_pred(s, r)
    elif formulation == "end":
        it_r, comp = _end_following_iters(src_r, epsilon, strict)
        it_s = FilteringIterator(_cursor(src_s), _END)
        # Mirrored start condition: s starts inside r, within delta of r's start.
        start_pred = _start_order_filter(strict, delta)
        pred = lambda r, s: start_pred(s, r)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    chain = FilteringConsumer(pred, consumer)
    return _run(rel_r, rel_s, it_r, it_s, comp, chain, engine, capacity)


def _dispatch(spec, rel_r, rel_s, src_r, src_s, consumer,
              engine, capacity, formulation) -> JoinStats:
    rel = spec.relation
    kw = dict(engine=engine, capacity=capacity)
    if rel is _R.START_PRECEDING:
        return start_preceding(rel_r, rel_s, src_r, src_s, consumer,
                               delta=spec.delta, strict=spec.strict, **kw)
    if rel is _R.END_FOLLOWING:
        return end_following(rel_r, rel_s, src_r, src_s, consumer,
                             epsilon=spec.epsilon, strict=spec.strict, **kw)
    if rel is _R.BEFORE:
        return general_before(rel_r, rel_s, src_r, src_s, consumer,
                              beta=1 if spec.strict else 0,
                              delta=spec.delta, **kw)
    if rel is _R.LEFT_OVERLAP:
        return left_overlap(rel_r, rel_s, src_r, src_s, consumer,
                            delta=spec.delta, epsilon=spec.epsilon,
                            strict=spec.strict, **kw)
    if rel is _R.RIGHT_OVERLAP:
        return right_overlap(rel_r, rel_s, src_r, src_s, consumer,
                             delta=spec.delta, epsilon=spec.epsilon,
                             strict=spec.strict, **kw)
    if rel is _R.DURING:
        return during(rel_r, rel_s, src_r, src_s, consumer,
                      delta=spec.delta, epsilon=spec.epsilon,
                      strict=spec.strict, formulation=formulation, **kw)
    if rel is _R.REVERSE_DURING:
        return reverse_during(rel_r, rel_s, src_r, src_s, consumer,
                              delta=spec.delta, epsilon=spec.epsilon,
                              strict=spec.strict, formulation=formulation, **kw)
    if rel is _R.ALLEN_BEFORE:
        return general_before(rel_r, rel_s, src_r, src_s, consumer,
                              beta=1, delta=None, **kw)
    if rel is _R.ALLEN_MEETS:
        return general_before(rel_r, rel_s, src_r, src_s, consumer,
                              beta=0, delta=0, **kw)
    if rel is _R.ALLEN_OVERLAPS:
        return left_overlap(rel_r, rel_s, src_r, src_s, consumer,
                            strict=True, **kw)
    if rel is _R.ALLEN_DURING:
        return during(rel_r, rel_s, src_r, src_s, consumer,
                      strict=True, formulation=formulation, **kw)
    if rel is _R.ALLEN_STARTS:
        return starts_join(rel_r, rel_s, src_r, src_s, consumer, **kw)
    if rel is _R.ALLEN_FINISHES:
        return finishes_join(rel_r, rel_s, src_r, src_s, consumer, **kw)
    if rel is _R.ALLEN_EQUALS:
        return equals_join(rel_r, rel_s, src_r, src_s, consumer, **kw)
    raise ValueError(f"no plan for relation {rel!r}")


def run_join(
    spec: PredicateSpec,
    rel_r: Relation,
    rel_s: Relation,
    sink=None,
    *,
    src_r=None,
    src_s=None,
    engine: str = "lazy",
    capacity: int = DEFAULT_CAPACITY,
    formulation: str = "start",
) -> Tuple[Optional[Set[Tuple[int, int]]], JoinStats]:
    """Execute the join plan for ``spec`` over two relations.

    Without a sink, returns the result as a set of (r.id, s.id) pairs.
    With a sink (any consumer callable), pairs stream into it as they are
    produced and the pair set slot is None.  ``src_r``/``src_s`` override
    the endpoint sources, e.g. with StreamSource feeds; by default the
    endpoint indexes are built here.
    """
    spec.check()
    if src_r is None:
        src_r = build_endpoint_index(rel_r)
    if src_s is None:
        src_s = build_endpoint_index(rel_s)
    collector = PairCollector() if sink is None else sink
    base = _INVERSE.get(spec.relation)
    if base is None:
        stats = _dispatch(spec, rel_r, rel_s, src_r, src_s, collector,
                          engine, capacity, formulation)
    else:
        primal = PredicateSpec(base, spec.delta, spec.epsilon, spec.strict)
        stats = _dispatch(primal, rel_s, rel_r, src_s, src_r,
                          ReversingConsumer(collector),
                          engine, capacity, formulation)
    pairs = collector.pair_set() if sink is None else None
    return pairs, stats


def partitioned_join(
    spec: PredicateSpec,
    rel_r: Relation,
    rel_s: Relation,
    k: int,
    *,
    engine: str = "lazy",
    capacity: int = DEFAULT_CAPACITY,
    formulation: str = "start",
    parallel: bool = False,
) -> Tuple[Set[Tuple[int, int]], List[JoinStats]]:
    """Split r round-robin (by start order) into k parts, join each against
    the full s, and union the results.

    Every r tuple lands in exactly one part and each part join is complete
    for the tuples it holds, so the union equals the unpartitioned result
    for any relation.  ``parallel`` runs the part joins in a thread pool.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    spec.check()
    order = sorted(range(len(rel_r)), key=lambda i: rel_r.tuples[i].ts)
    parts: List[List[int]] = [[] for _ in range(k)]
    for pos, tid in enumerate(order):
        parts[pos % k].append(tid)
    src_s = build_endpoint_index(rel_s)

    def one(part_ids):
        sub = Relation(
            name=rel_r.name,
            tuples=[
                rel_r.tuples[tid]._replace(id=j)
                for j, tid in enumerate(part_ids)
            ],
        )
        pairs, stats = run_join(spec, sub, rel_s, src_s=src_s, engine=engine,
                                capacity=capacity, formulation=formulation)
        return {(part_ids[i], j) for i, j in pairs}, stats

    results: Set[Tuple[int, int]] = set()
    all_stats: List[JoinStats] = []
    if parallel and k > 1:
        with ThreadPoolExecutor(max_workers=k) as pool:
            for pairs, stats in pool.map(one, parts):
                results |= pairs
                all_stats.append(stats)
    else:
        for part in parts:
            pairs, stats = one(part)
            results |= pairs
            all_stats.append(stats)
    return results, all_stats
