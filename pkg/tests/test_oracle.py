import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweepjoin.core import IntervalRelation, PredicateError, PredicateSpec, Relation
from sweepjoin.oracle import eval_predicate, matrix_join, nested_loop_join

R = IntervalRelation

# Two small relations exercising touching, nesting, equality and disjointness.
REL_R = Relation.from_intervals([(0, 1), (1, 3), (2, 5)], "r")
REL_S = Relation.from_intervals([(1, 3), (3, 4)], "s")

# Hand-derived result sets for every relation against REL_R/REL_S.
FROZEN = {
    PredicateSpec(R.START_PRECEDING): {(1, 0), (2, 1)},
    PredicateSpec(R.START_PRECEDING, delta=0): {(1, 0)},
    PredicateSpec(R.END_FOLLOWING): {(1, 0), (2, 0), (2, 1)},
    PredicateSpec(R.END_FOLLOWING, epsilon=1): {(1, 0), (2, 1)},
    PredicateSpec(R.BEFORE, delta=1): {(0, 0), (1, 1)},
    PredicateSpec(R.BEFORE): {(0, 0), (0, 1), (1, 1)},
    PredicateSpec(R.LEFT_OVERLAP): {(1, 0)},
    PredicateSpec(R.DURING): {(1, 0)},
    PredicateSpec(R.ALLEN_BEFORE): {(0, 1)},
    PredicateSpec(R.ALLEN_MEETS): {(0, 0), (1, 1)},
    PredicateSpec(R.ALLEN_OVERLAPS): set(),
    PredicateSpec(R.ALLEN_EQUALS): {(1, 0)},
    PredicateSpec(R.ALLEN_STARTS): set(),
    PredicateSpec(R.ALLEN_FINISHES): set(),
    PredicateSpec(R.ALLEN_DURING): set(),
}


@pytest.mark.parametrize("spec,want", FROZEN.items(),
                         ids=[s.relation.value for s in FROZEN])
def test_frozen_results(spec, want):
    assert nested_loop_join(spec, REL_R, REL_S) == want
    assert matrix_join(spec, REL_R, REL_S) == want


def test_inverse_relations_swap_roles():
    for inv, base in [
        (R.INV_START_PRECEDING, R.START_PRECEDING),
        (R.INV_END_FOLLOWING, R.END_FOLLOWING),
        (R.INV_BEFORE, R.BEFORE),
        (R.ALLEN_AFTER, R.ALLEN_BEFORE),
        (R.ALLEN_MET_BY, R.ALLEN_MEETS),
        (R.ALLEN_OVERLAPPED_BY, R.ALLEN_OVERLAPS),
        (R.ALLEN_CONTAINS, R.ALLEN_DURING),
        (R.ALLEN_STARTED_BY, R.ALLEN_STARTS),
        (R.ALLEN_FINISHED_BY, R.ALLEN_FINISHES),
    ]:
        got = matrix_join(PredicateSpec(inv), REL_R, REL_S)
        swapped = matrix_join(PredicateSpec(base), REL_S, REL_R)
        assert got == {(r, s) for s, r in swapped}


def test_allen_relations_partition_every_pair():
    # the thirteen classic relations are exhaustive and mutually exclusive
    rng = random.Random(5)
    allen = [r for r in IntervalRelation if r.value.startswith("allen-")]
    for _ in range(200):
        a = rng.randint(0, 10)
        b = a + rng.randint(1, 6)
        c = rng.randint(0, 10)
        d = c + rng.randint(1, 6)
        rel_r = Relation.from_intervals([(a, b)])
        rel_s = Relation.from_intervals([(c, d)])
        holding = [r for r in allen
                   if matrix_join(PredicateSpec(r), rel_r, rel_s)]
        assert len(holding) == 1, (a, b, c, d, holding)


def test_relaxed_parameter_only_widens():
    rel_r = Relation.from_intervals([(i, i + 4) for i in range(0, 30, 3)])
    rel_s = Relation.from_intervals([(i, i + 2) for i in range(1, 30, 2)])
    for rel in (R.START_PRECEDING, R.BEFORE):
        prev = set()
        for delta in (0, 1, 2, 5, None):
            got = matrix_join(PredicateSpec(rel, delta=delta), rel_r, rel_s)
            assert prev <= got
            prev = got


def test_eval_predicate_scalar():
    r = Relation.from_intervals([(1, 5)])[0]
    s = Relation.from_intervals([(3, 8)])[0]
    assert eval_predicate(PredicateSpec(R.START_PRECEDING), r, s)
    assert not eval_predicate(PredicateSpec(R.START_PRECEDING, delta=1), r, s)
    assert eval_predicate(PredicateSpec(R.ALLEN_OVERLAPS), r, s)


def test_oracle_rejects_invalid_spec():
    with pytest.raises(PredicateError):
        nested_loop_join(PredicateSpec(R.ALLEN_MEETS, delta=1), REL_R, REL_S)


def test_empty_inputs():
    empty = Relation.from_intervals([])
    assert matrix_join(PredicateSpec(R.START_PRECEDING), empty, REL_S) == set()
    assert matrix_join(PredicateSpec(R.START_PRECEDING), REL_R, empty) == set()


intervals = st.lists(
    st.tuples(st.integers(0, 25), st.integers(1, 10)).map(lambda p: (p[0], p[0] + p[1])),
    max_size=15,
)
spec_strategy = st.builds(
    PredicateSpec,
    relation=st.sampled_from(list(IntervalRelation)),
    delta=st.none() | st.integers(0, 5),
    epsilon=st.none() | st.integers(0, 5),
    strict=st.booleans(),
)


@given(intervals, intervals, spec_strategy)
@settings(max_examples=300, deadline=None)
def test_matrix_equals_nested_loop(ivs_r, ivs_s, spec):
    if spec.validate():
        return
    rel_r = Relation.from_intervals(ivs_r)
    rel_s = Relation.from_intervals(ivs_s)
    assert matrix_join(spec, rel_r, rel_s) == nested_loop_join(spec, rel_r, rel_s)
