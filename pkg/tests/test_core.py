import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweepjoin.core import (
    INF,
    Endpoint,
    EndpointKind,
    IntervalRelation,
    IntervalTuple,
    PredicateError,
    PredicateSpec,
    Relation,
    RelationValidationError,
    build_endpoint_index,
    check_relation,
    compare_endpoints,
    is_sorted,
    saturating_add,
    validate_relation,
)


def test_endpoint_kind_end_sorts_before_start():
    assert EndpointKind.END < EndpointKind.START
    a = Endpoint(5, EndpointKind.END, 0)
    b = Endpoint(5, EndpointKind.START, 1)
    assert compare_endpoints(a, b) < 0
    assert compare_endpoints(b, a) > 0


def test_compare_endpoints_ignores_tuple_id():
    a = Endpoint(3, EndpointKind.START, 0)
    b = Endpoint(3, EndpointKind.START, 99)
    assert compare_endpoints(a, b) == 0


def test_saturating_add():
    assert saturating_add(5, 3) == 8
    assert saturating_add(5, -3) == 2
    assert saturating_add(INF, 100) == INF
    assert saturating_add(INF, -100) == INF
    assert saturating_add(INF - 1, 10) == INF
    assert saturating_add(3, INF) == INF


def test_relation_from_intervals_assigns_ids():
    rel = Relation.from_intervals([(1, 4), (2, 9, 7)])
    assert rel.tuples[0] == IntervalTuple(0, 1, 4, 0)
    assert rel.tuples[1] == IntervalTuple(1, 2, 9, 7)
    assert len(rel) == 2
    assert rel[1].payload == 7


def test_validate_relation_flags_bad_intervals():
    rel = Relation(tuples=[
        IntervalTuple(0, 5, 5),
        IntervalTuple(1, 9, 2),
        IntervalTuple(2, 1, INF),
        IntervalTuple(9, 1, 2),
    ])
    errors = validate_relation(rel)
    assert len(errors) == 4
    with pytest.raises(RelationValidationError):
        check_relation(rel)


def test_index_is_sorted_and_complete():
    rel = Relation.from_intervals([(3, 7), (1, 3), (3, 4)])
    idx = build_endpoint_index(rel)
    assert len(idx) == 6
    assert is_sorted(idx.events)
    # one start and one end per tuple
    for t in rel:
        assert Endpoint(t.ts, EndpointKind.START, t.id) in idx.events
        assert Endpoint(t.te, EndpointKind.END, t.id) in idx.events


def test_index_tie_order():
    # equal timestamps: ends first, then starts; ids ascending inside a run
    rel = Relation.from_intervals([(1, 3), (3, 5), (3, 6)])
    idx = build_endpoint_index(rel)
    assert idx.events == [
        Endpoint(1, EndpointKind.START, 0),
        Endpoint(3, EndpointKind.END, 0),
        Endpoint(3, EndpointKind.START, 1),
        Endpoint(3, EndpointKind.START, 2),
        Endpoint(5, EndpointKind.END, 1),
        Endpoint(6, EndpointKind.END, 2),
    ]


def test_index_columns_mirror_events():
    rel = Relation.from_intervals([(2, 8), (2, 2 + 5), (1, 9)])
    idx = build_endpoint_index(rel)
    ts, kind, tid = idx.cols
    assert [tuple(e) for e in idx.events] == list(
        zip(ts.tolist(), kind.tolist(), tid.tolist())
    )


intervals = st.lists(
    st.tuples(st.integers(0, 50), st.integers(1, 20)).map(lambda p: (p[0], p[0] + p[1])),
    max_size=60,
)


@given(intervals)
@settings(max_examples=200, deadline=None)
def test_index_always_sorted(ivs):
    idx = build_endpoint_index(Relation.from_intervals(ivs))
    assert is_sorted(idx.events)
    assert len(idx) == 2 * len(ivs)


def test_predicate_spec_validation():
    PredicateSpec(IntervalRelation.START_PRECEDING, delta=3).check()
    PredicateSpec(IntervalRelation.DURING, delta=0, epsilon=2, strict=True).check()
    PredicateSpec(IntervalRelation.ALLEN_EQUALS).check()

    with pytest.raises(PredicateError):
        PredicateSpec(IntervalRelation.START_PRECEDING, epsilon=1).check()
    with pytest.raises(PredicateError):
        PredicateSpec(IntervalRelation.END_FOLLOWING, delta=1).check()
    with pytest.raises(PredicateError):
        PredicateSpec(IntervalRelation.BEFORE, delta=-1).check()
    with pytest.raises(PredicateError):
        PredicateSpec(IntervalRelation.ALLEN_MEETS, strict=True).check()
    with pytest.raises(PredicateError):
        PredicateSpec(IntervalRelation.ALLEN_BEFORE, delta=2).check()


def test_predicate_spec_collects_all_errors():
    errors = PredicateSpec(IntervalRelation.ALLEN_DURING, delta=1, epsilon=1,
                           strict=True).validate()
    assert len(errors) == 3
