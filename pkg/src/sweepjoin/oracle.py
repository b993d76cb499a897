"""Reference implementations of every interval predicate.

Each predicate is stated directly as comparisons on the four interval
bounds, with no sweeping, rewriting or event ordering involved, so results
from this module serve as ground truth for the join algorithms.  The same
formula code evaluates scalar bounds and numpy arrays: ``matrix_join``
broadcasts the bounds of both relations into n x m comparison matrices,
which keeps verification over thousands of random instances fast.
"""

from __future__ import annotations

from typing import Set, Tuple

import numpy as np

from .core import IntervalRelation, PredicateSpec, Relation

_R = IntervalRelation


def _holds(spec: PredicateSpec, rs, re, ss, se):
    """Evaluate the predicate on bounds; works elementwise on arrays.

    rs/re are r's start and end, ss/se s's.  Boolean connectives use ``&``
    so numpy broadcasting applies unchanged.
    """
    rel = spec.relation
    delta = spec.delta
    eps = spec.epsilon
    strict = spec.strict

    if rel is _R.START_PRECEDING:
        out = (rs < ss) if strict else (rs <= ss)
        out = out & (ss < re)
        if delta is not None:
            out = out & (ss - rs <= delta)
        return out
    if rel is _R.END_FOLLOWING:
        out = (rs < se) & ((se < re) if strict else (se <= re))
        if eps is not None:
            out = out & (re - se <= eps)
        return out
    if rel is _R.BEFORE:
        out = (re < ss) if strict else (re <= ss)
        if delta is not None:
            out = out & (ss - re <= delta)
        return out
    if rel is _R.LEFT_OVERLAP:
        if strict:
            out = (rs < ss) & (ss < re) & (re < se)
        else:
            out = (rs <= ss) & (ss < re) & (re <= se)
        if delta is not None:
            out = out & (ss - rs <= delta)
        if eps is not None:
            out = out & (se - re <= eps)
        return out
    if rel is _R.RIGHT_OVERLAP:
        if strict:
            out = (ss < rs) & (rs < se) & (se < re)
        else:
            out = (ss <= rs) & (rs < se) & (se <= re)
        if delta is not None:
            out = out & (rs - ss <= delta)
        if eps is not None:
            out = out & (re - se <= eps)
        return out
    if rel is _R.DURING:
        if strict:
            out = (ss < rs) & (re < se)
        else:
            out = (ss <= rs) & (re <= se)
        if delta is not None:
            out = out & (rs - ss <= delta)
        if eps is not None:
            out = out & (se - re <= eps)
        return out
    if rel is _R.REVERSE_DURING:
        if strict:
            out = (rs < ss) & (se < re)
        else:
            out = (rs <= ss) & (se <= re)
        if delta is not None:
            out = out & (ss - rs <= delta)
        if eps is not None:
            out = out & (re - se <= eps)
        return out
    if rel is _R.INV_START_PRECEDING:
        return _holds(_swap(spec, _R.START_PRECEDING), ss, se, rs, re)
    if rel is _R.INV_END_FOLLOWING:
        return _holds(_swap(spec, _R.END_FOLLOWING), ss, se, rs, re)
    if rel is _R.INV_BEFORE:
        return _holds(_swap(spec, _R.BEFORE), ss, se, rs, re)

    if rel is _R.ALLEN_BEFORE:
        return re < ss
    if rel is _R.ALLEN_AFTER:
        return se < rs
    if rel is _R.ALLEN_MEETS:
        return re == ss
    if rel is _R.ALLEN_MET_BY:
        return se == rs
    if rel is _R.ALLEN_OVERLAPS:
        return (rs < ss) & (ss < re) & (re < se)
    if rel is _R.ALLEN_OVERLAPPED_BY:
        return (ss < rs) & (rs < se) & (se < re)
    if rel is _R.ALLEN_DURING:
        return (ss < rs) & (re < se)
    if rel is _R.ALLEN_CONTAINS:
        return (rs < ss) & (se < re)
    if rel is _R.ALLEN_STARTS:
        return (rs == ss) & (re < se)
    if rel is _R.ALLEN_STARTED_BY:
        return (rs == ss) & (se < re)
    if rel is _R.ALLEN_FINISHES:
        return (ss < rs) & (re == se)
    if rel is _R.ALLEN_FINISHED_BY:
        return (rs < ss) & (re == se)
    if rel is _R.ALLEN_EQUALS:
        return (rs == ss) & (re == se)
    raise ValueError(f"unknown relation {rel!r}")


def _swap(spec: PredicateSpec, base: IntervalRelation) -> PredicateSpec:
    return PredicateSpec(base, spec.delta, spec.epsilon, spec.strict)


def eval_predicate(spec: PredicateSpec, r, s) -> bool:
    """Does the relation hold between interval tuples r and s?"""
    return bool(_holds(spec, r.ts, r.te, s.ts, s.te))


def nested_loop_join(
    spec: PredicateSpec, rel_r: Relation, rel_s: Relation
) -> Set[Tuple[int, int]]:
    """All qualifying (r.id, s.id) pairs by exhaustive pairwise testing."""
    spec.check()
    out = set()
    for r in rel_r.tuples:
        for s in rel_s.tuples:
            if _holds(spec, r.ts, r.te, s.ts, s.te):
                out.add((r.id, s.id))
    return out


def matrix_join(
    spec: PredicateSpec, rel_r: Relation, rel_s: Relation
) -> Set[Tuple[int, int]]:
    """Same result as nested_loop_join via one broadcast evaluation."""
    spec.check()
    if not rel_r.tuples or not rel_s.tuples:
        return set()
    rb = np.array([(t.ts, t.te) for t in rel_r.tuples], dtype=np.int64)
    sb = np.array([(t.ts, t.te) for t in rel_s.tuples], dtype=np.int64)
    mask = _holds(
        spec,
        rb[:, 0][:, None], rb[:, 1][:, None],
        sb[:, 0][None, :], sb[:, 1][None, :],
    )
    return {(int(i), int(j)) for i, j in np.argwhere(mask)}
