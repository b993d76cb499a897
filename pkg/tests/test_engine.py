import pytest

from sweepjoin.core import (
    ComparatorKind,
    EndpointKind,
    Relation,
    SweepJoinError,
    build_endpoint_index,
)
from sweepjoin.engine import (
    ChecksumConsumer,
    DuplicateActiveTupleError,
    FilteringConsumer,
    JoinStats,
    PairCollector,
    ReversingConsumer,
    TeeConsumer,
    collect_comparisons,
    compute_gnorf,
    join_by_s,
    lazy_join_by_s,
)
from sweepjoin.iterators import FilteringIterator, IndexIterator, StreamSource

R = Relation.from_intervals([(1, 4), (2, 6), (5, 7)], "r")
S = Relation.from_intervals([(2, 3), (5, 9)], "s")


def run(engine="eager", capacity=2048, comp=ComparatorKind.NON_STRICT):
    idx_r = build_endpoint_index(R)
    idx_s = build_endpoint_index(S)
    out = PairCollector()
    it_r = IndexIterator(idx_r)
    it_s = FilteringIterator(IndexIterator(idx_s), EndpointKind.START)
    if engine == "eager":
        stats = join_by_s(R, S, it_r, it_s, comp, out)
    else:
        stats = lazy_join_by_s(R, S, it_r, it_s, comp, out, capacity)
    return out, stats


def test_sweep_pairs_active_tuples_with_inner_starts():
    # start containment: r.ts <= s.ts < r.te
    out, stats = run()
    assert out.pair_set() == {(0, 0), (1, 0), (1, 1), (2, 1)}
    assert stats.output_count == 4
    assert stats.buffer_flushes == 0


def test_strict_comparator_drops_equal_start():
    out, _ = run(comp=ComparatorKind.STRICT)
    # pairs now need r.ts < s.ts: r1 starting exactly at s0's 2 is excluded,
    # as is r2 starting exactly at s1's 5
    assert out.pair_set() == {(0, 0), (1, 1)}


def test_emitted_at_is_the_inner_event_timestamp():
    out, _ = run()
    assert {(p.r_id, p.s_id, p.emitted_at) for p in out.pairs} == {
        (0, 0, 2), (1, 0, 2), (1, 1, 5), (2, 1, 5),
    }


@pytest.mark.parametrize("capacity", [1, 2, 3, 2048])
def test_lazy_equals_eager(capacity):
    eager, es = run("eager")
    lazy, ls = run("lazy", capacity)
    assert lazy.pair_set() == eager.pair_set()
    assert ls.output_count == es.output_count
    assert ls.getnext_count <= es.getnext_count
    assert ls.buffer_flushes >= 1


def test_duplicate_start_raises():
    rel = Relation.from_intervals([(1, 5)])
    idx = build_endpoint_index(rel)
    events = [idx.events[0]] + idx.events  # replay the start event
    with pytest.raises(DuplicateActiveTupleError):
        join_by_s(rel, S, IndexIterator(events),
                  FilteringIterator(IndexIterator(build_endpoint_index(S)),
                                    EndpointKind.START),
                  ComparatorKind.NON_STRICT, PairCollector())


def test_unmatched_end_is_tolerated():
    rel = Relation.from_intervals([(1, 5)])
    idx = build_endpoint_index(rel)
    events = idx.events + [idx.events[-1]]  # replay the end event
    out = PairCollector()
    join_by_s(rel, S, IndexIterator(events),
              FilteringIterator(IndexIterator(build_endpoint_index(S)),
                                EndpointKind.START),
              ComparatorKind.NON_STRICT, out)
    assert out.pair_set() == {(0, 0)}


def test_stream_fed_sides_take_the_pull_path():
    idx_r = build_endpoint_index(R)
    idx_s = build_endpoint_index(S)
    for stream_r, stream_s in [(True, False), (False, True), (True, True)]:
        it_r = StreamSource(iter(idx_r.events)).cursor() if stream_r else IndexIterator(idx_r)
        src_s = StreamSource(iter(idx_s.events)).cursor() if stream_s else IndexIterator(idx_s)
        out = PairCollector()
        join_by_s(R, S, it_r, FilteringIterator(src_s, EndpointKind.START),
                  ComparatorKind.NON_STRICT, out)
        assert out.pair_set() == {(0, 0), (1, 0), (1, 1), (2, 1)}


def test_filtering_consumer_counts_comparisons():
    inner = PairCollector()
    cons = FilteringConsumer(lambda r, s: (r.te <= s.te, 1), inner)
    idx_r = build_endpoint_index(R)
    idx_s = build_endpoint_index(S)
    stats = join_by_s(R, S, IndexIterator(idx_r),
                      FilteringIterator(IndexIterator(idx_s), EndpointKind.START),
                      ComparatorKind.NON_STRICT, cons)
    assert stats.comparison_count == stats.output_count == 4
    assert collect_comparisons(cons) == 4
    assert inner.pair_set() == {(1, 1), (2, 1)}


def test_reversing_consumer_swaps_pair_order():
    inner = PairCollector()
    ReversingConsumer(inner)(S[0], R[1], 2)
    assert inner.pairs[0].r_id == 1 and inner.pairs[0].s_id == 0


def test_tee_consumer_feeds_both():
    a, b = PairCollector(), ChecksumConsumer()
    tee = TeeConsumer(a, b)
    tee(R[0], S[0], 2)
    assert a.pairs and b.count == 1 and b.total == R[0].ts + S[0].ts


def test_checksum_consumer_matches_collector():
    out, _ = run()
    idx_r = build_endpoint_index(R)
    idx_s = build_endpoint_index(S)
    sink = ChecksumConsumer()
    join_by_s(R, S, IndexIterator(idx_r),
              FilteringIterator(IndexIterator(idx_s), EndpointKind.START),
              ComparatorKind.NON_STRICT, sink)
    assert sink.count == len(out.pairs)
    assert sink.total == sum(R[p.r_id].ts + S[p.s_id].ts for p in out.pairs)


def test_compute_gnorf():
    assert compute_gnorf(JoinStats(getnext_count=40, output_count=7),
                         JoinStats(getnext_count=10, output_count=7)) == 4.0
    assert compute_gnorf(JoinStats(), JoinStats()) == 1.0
    with pytest.raises(SweepJoinError):
        compute_gnorf(JoinStats(output_count=1), JoinStats(output_count=2))


def test_lazy_capacity_must_be_positive():
    with pytest.raises(ValueError):
        run("lazy", 0)
