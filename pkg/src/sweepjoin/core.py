"""Domain types for interval data and the sorted endpoint list driving the sweep.

Timestamps are plain Python integers on a logical (granularity-free) time
axis.  A reserved sentinel ``INF`` stands for "+infinity" and absorbs any
further shifting, so rewrites that push an interval end out to infinity never
overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

#: Largest representable finite timestamp; doubles as the +infinity sentinel.
INF = (1 << 63) - 1

LESS = -1
EQUAL = 0
GREATER = 1


class SweepJoinError(Exception):
    """Base class for errors raised by this package."""


class RelationValidationError(SweepJoinError):
    """A relation contains tuples violating the interval invariants."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("; ".join(errors))


def saturating_add(t: int, delta: int) -> int:
    """Shift timestamp ``t`` by ``delta``, saturating at INF.

    INF plus anything is INF, and any finite sum that would reach or exceed
    INF is clamped to it.
    """
    if t >= INF or delta >= INF:
        return INF
    v = t + delta
    return INF if v >= INF else v


class EndpointKind(IntEnum):
    """Endpoint type flag; the numeric values make end sort before start."""

    END = 0
    START = 1


class IntervalTuple(NamedTuple):
    """A tuple with a half-open validity interval [ts, te) and a payload."""

    id: int
    ts: int
    te: int
    payload: int = 0


class Endpoint(NamedTuple):
    """One interval boundary event: (timestamp, kind, owning tuple id)."""

    timestamp: int
    kind: EndpointKind
    tuple_id: int


def compare_endpoints(a: Endpoint, b: Endpoint) -> int:
    """Total order on endpoints by (timestamp, kind); tuple ids are ignored.

    At equal timestamps an END precedes a START, which is what makes
    half-open intervals close before the next one opens.  Returns -1, 0 or 1.
    """
    if a.timestamp != b.timestamp:
        return LESS if a.timestamp < b.timestamp else GREATER
    if a.kind != b.kind:
        return LESS if a.kind < b.kind else GREATER
    return EQUAL


class ComparatorKind(IntEnum):
    """Which endpoint comparison the sweep engine uses to break R/S ties."""

    STRICT = 0      # a < b
    NON_STRICT = 1  # a <= b

    def holds(self, a: Endpoint, b: Endpoint) -> bool:
        c = compare_endpoints(a, b)
        return c < 0 or (c == 0 and self is ComparatorKind.NON_STRICT)


@dataclass
class Relation:
    """An ordered collection of interval tuples, addressable by id.

    The tuple at position ``i`` has ``id == i``; joins rely on this for O(1)
    tuple loading from endpoint events.
    """

    name: str = ""
    tuples: list[IntervalTuple] = field(default_factory=list)

    @classmethod
    def from_intervals(
        cls,
        intervals: Iterable[tuple[int, ...]],
        name: str = "",
    ) -> "Relation":
        """Build a relation from (ts, te) or (ts, te, payload) pairs."""
        tuples = []
        for i, iv in enumerate(intervals):
            ts, te = iv[0], iv[1]
            payload = iv[2] if len(iv) > 2 else 0
            tuples.append(IntervalTuple(i, ts, te, payload))
        return cls(name=name, tuples=tuples)

    def __len__(self) -> int:
        return len(self.tuples)

    def __getitem__(self, tid: int) -> IntervalTuple:
        return self.tuples[tid]

    def __iter__(self) -> Iterator[IntervalTuple]:
        return iter(self.tuples)

    def bounds(self) -> "tuple[np.ndarray, np.ndarray]":
        """The (starts, ends) columns as int64 arrays, cached after first use.

        The cache assumes the tuple list is not mutated afterwards.
        """
        cached = getattr(self, "_bounds", None)
        if cached is None:
            ts = np.fromiter((t.ts for t in self.tuples), np.int64, len(self.tuples))
            te = np.fromiter((t.te for t in self.tuples), np.int64, len(self.tuples))
            cached = (ts, te)
            self._bounds = cached
        return cached


def validate_relation(rel: Relation) -> list[str]:
    """Check interval invariants; returns a list of problems (empty = ok)."""
    errors = []
    for i, t in enumerate(rel.tuples):
        if t.id != i:
            errors.append(f"tuple at position {i} has id {t.id}")
        if t.ts == t.te:
            errors.append(f"empty interval at id {t.id}")
        elif t.ts > t.te:
            errors.append(f"inverted interval at id {t.id}")
        if t.te >= INF:
            errors.append(f"non-finite end at id {t.id}")
    return errors


def check_relation(rel: Relation) -> None:
    """Raise RelationValidationError if the relation is invalid."""
    errors = validate_relation(rel)
    if errors:
        raise RelationValidationError(errors)


@dataclass(frozen=True)
class EndpointIndex:
    """The sorted list of all endpoint events of one relation.

    Events are sorted non-decreasing under (timestamp, kind); events that
    differ only in tuple id compare equal.  The sort is stable over a fixed
    extraction order (per tuple START then END, tuples in id order), so index
    construction is fully deterministic.
    """

    events: list[Endpoint]
    #: Optional columnar twin of ``events``: (timestamps, kinds, tuple ids)
    #: int64 arrays sorted under the same order.  Equal-key runs may be
    #: permuted relative to the event list, which no consumer depends on.
    cols: "tuple | None" = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Endpoint]:
        return iter(self.events)


def build_endpoint_index(rel: Relation) -> EndpointIndex:
    """Extract and sort the 2n endpoint events of a relation.

    Ties on (timestamp, kind) are resolved by ascending tuple id; the
    columnar twin is produced by the same sort, so both views list events
    in the identical order.
    """
    check_relation(rel)
    ts_col, te_col = rel.bounds()
    n = len(rel.tuples)
    cts = np.concatenate([ts_col, te_col])
    ckind = np.concatenate([
        np.full(n, int(EndpointKind.START), np.int64),
        np.full(n, int(EndpointKind.END), np.int64),
    ])
    ctid = np.concatenate([np.arange(n, dtype=np.int64)] * 2)
    order = np.lexsort((ckind, cts))
    cts, ckind, ctid = cts[order], ckind[order], ctid[order]
    kinds = (EndpointKind.END, EndpointKind.START)
    events = [
        Endpoint(t, kinds[k], i)
        for t, k, i in zip(cts.tolist(), ckind.tolist(), ctid.tolist())
    ]
    return EndpointIndex(events, (cts, ckind, ctid))


def is_sorted(events: Sequence[Endpoint]) -> bool:
    """True iff the event sequence is non-decreasing under the endpoint order."""
    return all(
        compare_endpoints(events[i], events[i + 1]) <= 0
        for i in range(len(events) - 1)
    )


class IntervalRelation(Enum):
    """All supported interval relations between two tuples r and s.

    The first block lists the distance-parameterized relations (delta bounds
    a start-to-start or end-to-start gap, epsilon an end-to-end gap; an
    absent parameter relaxes the constraint entirely).  The second block
    lists the thirteen classic exhaustive relations, which take no
    parameters and use strict inequalities throughout.
    """

    START_PRECEDING = "start-preceding"
    END_FOLLOWING = "end-following"
    BEFORE = "before"
    LEFT_OVERLAP = "left-overlap"
    RIGHT_OVERLAP = "right-overlap"
    DURING = "during"
    REVERSE_DURING = "reverse-during"
    INV_START_PRECEDING = "inv-start-preceding"
    INV_END_FOLLOWING = "inv-end-following"
    INV_BEFORE = "inv-before"

    ALLEN_BEFORE = "allen-before"
    ALLEN_AFTER = "allen-after"
    ALLEN_MEETS = "allen-meets"
    ALLEN_MET_BY = "allen-met-by"
    ALLEN_OVERLAPS = "allen-overlaps"
    ALLEN_OVERLAPPED_BY = "allen-overlapped-by"
    ALLEN_DURING = "allen-during"
    ALLEN_CONTAINS = "allen-contains"
    ALLEN_STARTS = "allen-starts"
    ALLEN_STARTED_BY = "allen-started-by"
    ALLEN_FINISHES = "allen-finishes"
    ALLEN_FINISHED_BY = "allen-finished-by"
    ALLEN_EQUALS = "allen-equals"


#: Relations that accept a delta (start-gap) parameter.
DELTA_RELATIONS = frozenset({
    IntervalRelation.START_PRECEDING,
    IntervalRelation.BEFORE,
    IntervalRelation.LEFT_OVERLAP,
    IntervalRelation.RIGHT_OVERLAP,
    IntervalRelation.DURING,
    IntervalRelation.REVERSE_DURING,
    IntervalRelation.INV_START_PRECEDING,
    IntervalRelation.INV_BEFORE,
})

#: Relations that accept an epsilon (end-gap) parameter.
EPSILON_RELATIONS = frozenset({
    IntervalRelation.END_FOLLOWING,
    IntervalRelation.LEFT_OVERLAP,
    IntervalRelation.RIGHT_OVERLAP,
    IntervalRelation.DURING,
    IntervalRelation.REVERSE_DURING,
    IntervalRelation.INV_END_FOLLOWING,
})

#: Parameterized relations; these also support a strict flavor.
PARAMETERIZED_RELATIONS = DELTA_RELATIONS | EPSILON_RELATIONS


class PredicateError(SweepJoinError):
    """Invalid predicate configuration (bad parameters for the relation)."""


@dataclass(frozen=True)
class PredicateSpec:
    """Which interval relation to join on, with optional distance bounds.

    ``strict`` switches the non-strict boundary comparisons of a
    parameterized relation to strict ones (for BEFORE it forbids the
    touching case, turning the relation into "strictly before within
    delta").  The thirteen classic relations are inherently strict and
    accept neither parameters nor the flag.
    """

    relation: IntervalRelation
    delta: int | None = None
    epsilon: int | None = None
    strict: bool = False

    def validate(self) -> list[str]:
        errors = []
        rel = self.relation
        if self.delta is not None:
            if rel not in DELTA_RELATIONS:
                errors.append(f"{rel.value} does not take a delta parameter")
            elif self.delta < 0:
                errors.append("delta must be >= 0")
        if self.epsilon is not None:
            if rel not in EPSILON_RELATIONS:
                errors.append(f"{rel.value} does not take an epsilon parameter")
            elif self.epsilon < 0:
                errors.append("epsilon must be >= 0")
        if self.strict and rel not in PARAMETERIZED_RELATIONS:
            errors.append(f"{rel.value} has no strict flavor")
        return errors

    def check(self) -> "PredicateSpec":
        errors = self.validate()
        if errors:
            raise PredicateError("; ".join(errors))
        return self
