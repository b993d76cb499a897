"""Composable pull cursors over sorted endpoint streams.

Every iterator exposes the same three-operation cursor interface plus
``drain()``, which returns all remaining events as a list when the whole
pipeline is backed by in-memory data.  Stream-fed sources return None from
drain(), forcing consumers (the join engine) into stepwise pulling.

Decorators never materialize their input up front; they transform events on
the fly, so virtual relation rewrites cost no extra memory.
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Tuple

import numpy as np

from .core import (
    INF,
    Endpoint,
    EndpointIndex,
    EndpointKind,
    SweepJoinError,
    compare_endpoints,
    saturating_add,
)

#: Columnar event batch: (timestamps, kinds, tuple ids) as int64 arrays.
Columns = Tuple[np.ndarray, np.ndarray, np.ndarray]

_START = EndpointKind.START
_END = EndpointKind.END


class StreamOrderError(SweepJoinError):
    """A stream feed delivered an endpoint out of order."""


class EndpointIterator:
    """Cursor protocol: get_endpoint / move_to_next / is_finished.

    get_endpoint is only valid while is_finished() is False.  The emitted
    sequence must be sorted non-decreasing under the endpoint total order;
    every implementation below preserves this for sorted inputs.
    """

    def get_endpoint(self) -> Endpoint:
        raise NotImplementedError

    def move_to_next(self) -> None:
        raise NotImplementedError

    def is_finished(self) -> bool:
        raise NotImplementedError

    def drain(self) -> Optional[List[Endpoint]]:
        """Remaining events as a list, exhausting the iterator, or None.

        None means the source cannot be materialized (stream feeds) and the
        caller has to pull event by event.  Unknown iterator types default
        to None, which is always safe.
        """
        return None

    def drain_columns(self) -> Optional[Columns]:
        """Remaining events as (timestamps, kinds, ids) int64 arrays, or None.

        Unlike drain(), this is side-effect free: the cursor is left where
        it is, so a caller getting None from one side of a join can still
        fall back to drain() or stepwise pulling.  Within runs of equal
        (timestamp, kind) the id order may differ from the event order;
        sweep results do not depend on it.
        """
        return None


class IndexIterator(EndpointIterator):
    """Cursor over an endpoint index (or any pre-sorted event list)."""

    __slots__ = ("_events", "_pos", "_cols")

    def __init__(self, index: "EndpointIndex | List[Endpoint]"):
        if isinstance(index, EndpointIndex):
            self._events = index.events
            self._cols = index.cols
        else:
            self._events = index
            self._cols = None
        self._pos = 0

    def get_endpoint(self) -> Endpoint:
        return self._events[self._pos]

    def move_to_next(self) -> None:
        self._pos += 1

    def is_finished(self) -> bool:
        return self._pos >= len(self._events)

    def drain(self) -> List[Endpoint]:
        out = self._events[self._pos:]
        self._pos = len(self._events)
        return out

    def drain_columns(self) -> Optional[Columns]:
        if self._cols is None:
            return None
        ts, kind, tid = self._cols
        p = self._pos
        return ts[p:], kind[p:], tid[p:]


class FilteringIterator(EndpointIterator):
    """Passes through only endpoints of one kind."""

    __slots__ = ("_src", "_kind")

    def __init__(self, src: EndpointIterator, kind: EndpointKind):
        self._src = src
        self._kind = kind
        self._skip()

    def _skip(self) -> None:
        src = self._src
        kind = self._kind
        while not src.is_finished() and src.get_endpoint().kind != kind:
            src.move_to_next()

    def get_endpoint(self) -> Endpoint:
        return self._src.get_endpoint()

    def move_to_next(self) -> None:
        self._src.move_to_next()
        self._skip()

    def is_finished(self) -> bool:
        return self._src.is_finished()

    def drain(self) -> Optional[List[Endpoint]]:
        events = self._src.drain()
        if events is None:
            return None
        kind = self._kind
        return [e for e in events if e[1] == kind]

    def drain_columns(self) -> Optional[Columns]:
        cols = self._src.drain_columns()
        if cols is None:
            return None
        ts, kind, tid = cols
        mask = kind == int(self._kind)
        return ts[mask], kind[mask], tid[mask]


class ShiftingIterator(EndpointIterator):
    """Shifts every timestamp by a constant and rewrites the endpoint kind.

    Arithmetic saturates at INF, so events already at infinity stay there.
    A constant shift preserves sortedness of the emitted stream.
    """

    __slots__ = ("_src", "_delta", "_kind")

    def __init__(self, src: EndpointIterator, delta: int, kind: EndpointKind):
        self._src = src
        self._delta = delta
        self._kind = kind

    def get_endpoint(self) -> Endpoint:
        e = self._src.get_endpoint()
        return Endpoint(saturating_add(e.timestamp, self._delta), self._kind, e.tuple_id)

    def move_to_next(self) -> None:
        self._src.move_to_next()

    def is_finished(self) -> bool:
        return self._src.is_finished()

    def drain(self) -> Optional[List[Endpoint]]:
        events = self._src.drain()
        if events is None:
            return None
        d = self._delta
        kind = self._kind
        return [Endpoint(saturating_add(t, d), kind, tid) for t, _, tid in events]

    def drain_columns(self) -> Optional[Columns]:
        cols = self._src.drain_columns()
        if cols is None:
            return None
        ts, _, tid = cols
        d = self._delta
        if d >= 0:
            # Clamp the step so the sum never exceeds (or wraps past) INF.
            shifted = ts + np.minimum(d, INF - ts)
        else:
            shifted = np.where(ts >= INF, INF, ts + d)
        return shifted, np.full(len(ts), int(self._kind), np.int64), tid


class MergingIterator(EndpointIterator):
    """Sorted interleaving of two sorted sources; ties go to the second one."""

    __slots__ = ("_a", "_b")

    def __init__(self, a: EndpointIterator, b: EndpointIterator):
        self._a = a
        self._b = b

    def _pick(self) -> EndpointIterator:
        a, b = self._a, self._b
        if b.is_finished():
            return a
        if a.is_finished():
            return b
        return a if compare_endpoints(a.get_endpoint(), b.get_endpoint()) < 0 else b

    def get_endpoint(self) -> Endpoint:
        return self._pick().get_endpoint()

    def move_to_next(self) -> None:
        self._pick().move_to_next()

    def is_finished(self) -> bool:
        return self._a.is_finished() and self._b.is_finished()

    def drain(self) -> Optional[List[Endpoint]]:
        la = self._a.drain()
        if la is None:
            return None
        lb = self._b.drain()
        if lb is None:
            # Hand the already drained events back so pulling still works.
            self._a = IndexIterator(la)
            return None
        out: List[Endpoint] = []
        append = out.append
        i = j = 0
        na, nb = len(la), len(lb)
        while i < na and j < nb:
            ea = la[i]
            eb = lb[j]
            if ea[0] < eb[0] or (ea[0] == eb[0] and ea[1] < eb[1]):
                append(ea)
                i += 1
            else:
                append(eb)
                j += 1
        out.extend(la[i:])
        out.extend(lb[j:])
        return out

    def drain_columns(self) -> Optional[Columns]:
        ca = self._a.drain_columns()
        if ca is None:
            return None
        cb = self._b.drain_columns()
        if cb is None:
            return None
        ts = np.concatenate([ca[0], cb[0]])
        kind = np.concatenate([ca[1], cb[1]])
        tid = np.concatenate([ca[2], cb[2]])
        # On (timestamp, kind) ties the second source wins, hence side 1
        # for the first source; lexsort is stable within each source.
        side = np.concatenate([
            np.ones(len(ca[0]), np.int64), np.zeros(len(cb[0]), np.int64),
        ])
        order = np.lexsort((side, kind, ts))
        return ts[order], kind[order], tid[order]


class FirstEndIterator(EndpointIterator):
    """Per tuple id, lets the first End through and swallows the second.

    Start events pass unchanged.  Used where every tuple is represented by
    one Start and two Ends and only the earlier End should take effect.
    The bookkeeping set holds only ids whose first End has passed but whose
    second has not, so memory stays proportional to the open tuples.
    """

    __slots__ = ("_src", "_seen")

    def __init__(self, src: EndpointIterator):
        self._src = src
        self._seen: set[int] = set()
        self._skip()

    def _skip(self) -> None:
        src = self._src
        seen = self._seen
        while not src.is_finished():
            e = src.get_endpoint()
            if e.kind == _END and e.tuple_id in seen:
                seen.remove(e.tuple_id)
                src.move_to_next()
                continue
            break

    def get_endpoint(self) -> Endpoint:
        return self._src.get_endpoint()

    def move_to_next(self) -> None:
        e = self._src.get_endpoint()
        if e.kind == _END:
            self._seen.add(e.tuple_id)
        self._src.move_to_next()
        self._skip()

    def is_finished(self) -> bool:
        return self._src.is_finished()

    def drain(self) -> Optional[List[Endpoint]]:
        events = self._src.drain()
        if events is None:
            return None
        out: List[Endpoint] = []
        append = out.append
        seen = self._seen
        for e in events:
            if e[1] == _END:
                tid = e[2]
                if tid in seen:
                    seen.remove(tid)
                    continue
                seen.add(tid)
            append(e)
        return out

    def drain_columns(self) -> Optional[Columns]:
        cols = self._src.drain_columns()
        if cols is None:
            return None
        ts, kind, tid = cols
        is_end = kind == int(_END)
        keep = ~is_end
        end_pos = np.flatnonzero(is_end)
        # First remaining End per id survives, unless that id's first End
        # already went past this cursor (then the remaining one is the
        # second and is swallowed).
        _, first = np.unique(tid[end_pos], return_index=True)
        first_pos = end_pos[first]
        keep[first_pos] = True
        if self._seen:
            seen = np.fromiter(self._seen, np.int64, len(self._seen))
            keep[first_pos[np.isin(tid[first_pos], seen)]] = False
        return ts[keep], kind[keep], tid[keep]


class SecondStartIterator(EndpointIterator):
    """Per tuple id, swallows the first Start and lets the second through.

    End events pass unchanged.  The mirror image of FirstEndIterator, used
    where every tuple carries two Starts and only the later one should
    activate it.
    """

    __slots__ = ("_src", "_seen")

    def __init__(self, src: EndpointIterator):
        self._src = src
        self._seen: set[int] = set()
        self._skip()

    def _skip(self) -> None:
        src = self._src
        seen = self._seen
        while not src.is_finished():
            e = src.get_endpoint()
            if e.kind == _START and e.tuple_id not in seen:
                seen.add(e.tuple_id)
                src.move_to_next()
                continue
            break

    def get_endpoint(self) -> Endpoint:
        return self._src.get_endpoint()

    def move_to_next(self) -> None:
        e = self._src.get_endpoint()
        if e.kind == _START:
            self._seen.discard(e.tuple_id)
        self._src.move_to_next()
        self._skip()

    def is_finished(self) -> bool:
        return self._src.is_finished()

    def drain(self) -> Optional[List[Endpoint]]:
        events = self._src.drain()
        if events is None:
            return None
        out: List[Endpoint] = []
        append = out.append
        seen = self._seen
        for e in events:
            if e[1] == _START:
                tid = e[2]
                if tid in seen:
                    seen.discard(tid)
                    append(e)
                else:
                    seen.add(tid)
            else:
                append(e)
        return out

    def drain_columns(self) -> Optional[Columns]:
        cols = self._src.drain_columns()
        if cols is None:
            return None
        ts, kind, tid = cols
        is_start = kind == int(_START)
        keep = ~is_start
        start_pos = np.flatnonzero(is_start)
        # Last remaining Start per id survives.  Ids whose first Start was
        # already swallowed have exactly one left, which is the right one.
        _, first_rev = np.unique(tid[start_pos][::-1], return_index=True)
        keep[start_pos[len(start_pos) - 1 - first_rev]] = True
        return ts[keep], kind[keep], tid[keep]


class StreamSourceIterator(EndpointIterator):
    """Cursor over an ordered endpoint feed (any iterable of events).

    Events are pulled one at a time; an out-of-order event raises
    StreamOrderError naming both endpoints.  drain() returns None so join
    engines process the stream incrementally and can emit results as soon
    as they are logically determined.
    """

    __slots__ = ("_it", "_last", "_cur")

    def __init__(self, feed: Iterable):
        self._it = iter(feed)
        self._last: Optional[Endpoint] = None
        self._cur = self._pull()

    def _pull(self) -> Optional[Endpoint]:
        e = next(self._it, None)
        if e is None:
            return None
        if not isinstance(e, Endpoint):
            e = Endpoint(e[0], EndpointKind(e[1]), e[2])
        last = self._last
        if last is not None and compare_endpoints(last, e) > 0:
            raise StreamOrderError(
                f"out-of-order feed: {tuple(e)} arrived after {tuple(last)}"
            )
        self._last = e
        return e

    def get_endpoint(self) -> Endpoint:
        if self._cur is None:
            raise SweepJoinError("get_endpoint called on a finished stream")
        return self._cur

    def move_to_next(self) -> None:
        self._cur = self._pull()

    def is_finished(self) -> bool:
        return self._cur is None

    def drain(self) -> None:
        return None


class StreamSource:
    """Fan-out wrapper giving several independent cursors over one feed.

    Join assemblies may need more than one cursor over the same event
    stream (rewrites that keep the original endpoints and add shifted
    copies).  Pulled events are buffered so each cursor advances at its own
    pace; memory grows with the feed length, which suits the bounded feeds
    this is meant for.
    """

    def __init__(self, feed: Iterable):
        self._it = iter(feed)
        self._buf: list = []

    def _get(self, pos: int):
        buf = self._buf
        while pos >= len(buf):
            e = next(self._it, None)
            if e is None:
                return None
            buf.append(e)
        return buf[pos]

    def _replay(self):
        pos = 0
        while True:
            e = self._get(pos)
            if e is None:
                return
            yield e
            pos += 1

    def cursor(self) -> StreamSourceIterator:
        return StreamSourceIterator(self._replay())
