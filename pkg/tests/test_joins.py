import itertools
import random

import pytest

from sweepjoin.core import (
    DELTA_RELATIONS,
    EPSILON_RELATIONS,
    IntervalRelation,
    PredicateSpec,
    Relation,
    build_endpoint_index,
)
from sweepjoin.engine import JoinStats, PairCollector
from sweepjoin.joins import general_before, partitioned_join, run_join
from sweepjoin.oracle import matrix_join

R = IntervalRelation

REL_R = Relation.from_intervals([(0, 1), (1, 3), (2, 5)], "r")
REL_S = Relation.from_intervals([(1, 3), (3, 4)], "s")


def all_specs(deltas=(None, 0, 2), epsilons=(None, 0, 2), stricts=(False, True)):
    out = []
    for rel in IntervalRelation:
        ds = deltas if rel in DELTA_RELATIONS else (None,)
        es = epsilons if rel in EPSILON_RELATIONS else (None,)
        ss = stricts if (rel in DELTA_RELATIONS or rel in EPSILON_RELATIONS) else (False,)
        for d, e, s in itertools.product(ds, es, ss):
            out.append(PredicateSpec(rel, d, e, s))
    return out


def rand_rel(rng, n, hi=40, dur=10):
    return Relation.from_intervals(
        [(ts, ts + rng.randint(1, dur))
         for ts in (rng.randint(0, hi) for _ in range(n))]
    )


@pytest.mark.parametrize("spec", [
    PredicateSpec(R.START_PRECEDING),
    PredicateSpec(R.START_PRECEDING, delta=0),
    PredicateSpec(R.END_FOLLOWING),
    PredicateSpec(R.END_FOLLOWING, epsilon=1),
    PredicateSpec(R.BEFORE, delta=1),
    PredicateSpec(R.ALLEN_BEFORE),
    PredicateSpec(R.ALLEN_MEETS),
    PredicateSpec(R.LEFT_OVERLAP),
    PredicateSpec(R.DURING),
    PredicateSpec(R.ALLEN_EQUALS),
], ids=lambda s: f"{s.relation.value}-{s.delta}-{s.epsilon}")
def test_known_small_results(spec):
    want = matrix_join(spec, REL_R, REL_S)
    got, _ = run_join(spec, REL_R, REL_S)
    assert got == want


@pytest.mark.parametrize("engine,capacity", [
    ("eager", 2048), ("lazy", 1), ("lazy", 4), ("lazy", 2048),
])
def test_all_relations_match_oracle(engine, capacity):
    rng = random.Random(101)
    for trial in range(6):
        rel_r = rand_rel(rng, rng.randint(0, 25))
        rel_s = rand_rel(rng, rng.randint(0, 25))
        for spec in all_specs():
            want = matrix_join(spec, rel_r, rel_s)
            got, _ = run_join(spec, rel_r, rel_s, engine=engine, capacity=capacity)
            assert got == want, (spec, trial)


@pytest.mark.parametrize("relation", [R.DURING, R.REVERSE_DURING])
def test_containment_formulations_agree(relation):
    rng = random.Random(55)
    for _ in range(10):
        rel_r = rand_rel(rng, 20)
        rel_s = rand_rel(rng, 20)
        for d, e, s in itertools.product((None, 0, 3), (None, 0, 3), (False, True)):
            spec = PredicateSpec(relation, d, e, s)
            a, _ = run_join(spec, rel_r, rel_s, formulation="start")
            b, _ = run_join(spec, rel_r, rel_s, formulation="end")
            assert a == b == matrix_join(spec, rel_r, rel_s)


def test_unknown_formulation_rejected():
    with pytest.raises(ValueError):
        run_join(PredicateSpec(R.DURING), REL_R, REL_S, formulation="middle")
    with pytest.raises(ValueError):
        run_join(PredicateSpec(R.DURING), REL_R, REL_S, engine="warp")


def test_empty_gap_window_yields_nothing():
    # a strictly-positive gap capped below one unit can never hold
    idx_r = build_endpoint_index(REL_R)
    idx_s = build_endpoint_index(REL_S)
    out = PairCollector()
    stats = general_before(REL_R, REL_S, idx_r, idx_s, out, beta=1, delta=0)
    assert out.pairs == []
    assert stats == JoinStats()


def test_sink_streams_pairs_with_positions():
    sink = PairCollector()
    pairs, _ = run_join(PredicateSpec(R.START_PRECEDING), REL_R, REL_S, sink)
    assert pairs is None
    assert {(p.r_id, p.s_id) for p in sink.pairs} == {(1, 0), (2, 1)}
    for p in sink.pairs:
        s = REL_S[p.s_id]
        assert p.emitted_at == s.ts  # known as soon as the start arrives


def test_lazy_never_fetches_more_than_eager():
    rng = random.Random(7)
    for _ in range(5):
        rel_r = rand_rel(rng, 30)
        rel_s = rand_rel(rng, 30)
        for spec in (PredicateSpec(R.START_PRECEDING),
                     PredicateSpec(R.END_FOLLOWING, epsilon=2),
                     PredicateSpec(R.BEFORE, delta=3)):
            _, eager = run_join(spec, rel_r, rel_s, engine="eager")
            for cap in (1, 2, 7, 32):
                _, lazy = run_join(spec, rel_r, rel_s, engine="lazy", capacity=cap)
                assert lazy.output_count == eager.output_count
                assert lazy.getnext_count <= eager.getnext_count


@pytest.mark.parametrize("k", [1, 2, 4, 7])
def test_partitioned_join_is_sound(k):
    rng = random.Random(23)
    rel_r = rand_rel(rng, 40)
    rel_s = rand_rel(rng, 40)
    for spec in (PredicateSpec(R.START_PRECEDING, delta=2),
                 PredicateSpec(R.ALLEN_DURING),
                 PredicateSpec(R.INV_BEFORE, delta=1)):
        want = matrix_join(spec, rel_r, rel_s)
        got, stats = partitioned_join(spec, rel_r, rel_s, k)
        assert got == want
        assert len(stats) == k


def test_partitioned_join_parallel():
    rng = random.Random(29)
    rel_r = rand_rel(rng, 50)
    rel_s = rand_rel(rng, 50)
    spec = PredicateSpec(R.START_PRECEDING)
    want = matrix_join(spec, rel_r, rel_s)
    got, _ = partitioned_join(spec, rel_r, rel_s, 4, parallel=True)
    assert got == want


def test_partitioned_join_rejects_bad_k():
    with pytest.raises(ValueError):
        partitioned_join(PredicateSpec(R.START_PRECEDING), REL_R, REL_S, 0)
