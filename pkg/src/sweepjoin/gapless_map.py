"""Active-tuple-set stores: a gapless hash map and a pointer-chasing baseline.

The gapless map keeps all live entries packed into positions [0, tail) of two
parallel arrays (element metadata and tuple records), so a full scan is a
plain sequential pass over tuple data with no per-entry indirection.  Removal
swaps the victim with the last entry and repairs the affected chain links.

The chained baseline has the same observable map semantics but stores each
entry in its own node object, linked both into a per-bucket chain and into a
doubly-linked scan list, mimicking a classic linked hash map.
"""

from __future__ import annotations

from typing import Callable, Iterator, List

import numpy as np

from .core import IntervalTuple, SweepJoinError

_EMPTY = -1
_FIB = 0x9E3779B97F4A7C15
_M64 = (1 << 64) - 1


class DuplicateKeyError(SweepJoinError):
    """Inserting a key that is already present is a contract violation."""


class GaplessHashMap:
    """Hash map with contiguous element metadata and by-value tuple storage.

    Tuple records live packed in rows [0, len) of one flat integer array
    (columns id, ts, te, payload), not as individually allocated objects,
    so a scan touches memory strictly sequentially no matter how the map
    was churned.

    ``debug=True`` enables duplicate-insert detection and is the mode used by
    the structural audits in the test suite; the default mode skips the extra
    chain walk on insert because join algorithms only ever insert fresh ids.
    """

    __slots__ = (
        "_buckets", "_nbuckets", "_shift",
        "_keys", "_next", "_prev", "_rows",
        "debug",
    )

    def __init__(self, nbuckets: int = 16, debug: bool = False):
        if nbuckets & (nbuckets - 1):
            raise ValueError("bucket count must be a power of two")
        self._nbuckets = nbuckets
        self._shift = 64 - nbuckets.bit_length() + 1
        self._buckets: List[int] = [_EMPTY] * nbuckets
        self._keys: List[int] = []
        self._next: List[int] = []
        # Back-reference: >= 0 is a predecessor element index, < 0 encodes
        # bucket-table cell -(v + 1).
        self._prev: List[int] = []
        self._rows = np.empty((nbuckets, 4), np.int64)
        self.debug = debug

    def __len__(self) -> int:
        return len(self._keys)

    def _bucket(self, key: int) -> int:
        return (key * _FIB & _M64) >> self._shift

    def insert(self, key: int, tup: IntervalTuple) -> None:
        if self.debug and self.contains(key):
            raise DuplicateKeyError(f"key {key} already present")
        b = (key * _FIB & _M64) >> self._shift
        buckets = self._buckets
        pos = len(self._keys)
        head = buckets[b]
        self._keys.append(key)
        self._next.append(head)
        self._prev.append(-b - 1)
        if pos == len(self._rows):
            self._rows = np.concatenate([self._rows, np.empty_like(self._rows)])
        self._rows[pos] = tup
        if head != _EMPTY:
            self._prev[head] = pos
        buckets[b] = pos
        if pos + 1 > (self._nbuckets >> 2) * 3:
            self._grow()

    def remove(self, key: int) -> bool:
        """Remove ``key`` if present; returns False (no-op) when it is absent."""
        buckets = self._buckets
        keys = self._keys
        nxt = self._next
        prv = self._prev
        b = (key * _FIB & _M64) >> self._shift
        cur = buckets[b]
        while cur != _EMPTY and keys[cur] != key:
            cur = nxt[cur]
        if cur == _EMPTY:
            return False
        # Unlink cur from its chain.
        n = nxt[cur]
        p = prv[cur]
        if p >= 0:
            nxt[p] = n
        else:
            buckets[-p - 1] = n
        if n != _EMPTY:
            prv[n] = p
        # Fill the gap with the last element.
        last = len(keys) - 1
        if cur != last:
            keys[cur] = keys[last]
            nxt[cur] = n2 = nxt[last]
            prv[cur] = p2 = prv[last]
            self._rows[cur] = self._rows[last]
            if p2 >= 0:
                nxt[p2] = cur
            else:
                buckets[-p2 - 1] = cur
            if n2 != _EMPTY:
                prv[n2] = cur
        keys.pop()
        nxt.pop()
        prv.pop()
        return True

    def contains(self, key: int) -> bool:
        keys = self._keys
        nxt = self._next
        cur = self._buckets[(key * _FIB & _M64) >> self._shift]
        while cur != _EMPTY:
            if keys[cur] == key:
                return True
            cur = nxt[cur]
        return False

    def get(self, key: int) -> IntervalTuple | None:
        keys = self._keys
        nxt = self._next
        cur = self._buckets[(key * _FIB & _M64) >> self._shift]
        while cur != _EMPTY:
            if keys[cur] == key:
                return IntervalTuple(*self._rows[cur].tolist())
            cur = nxt[cur]
        return None

    def rows(self) -> np.ndarray:
        """The packed storage as an (len, 4) array view: id, ts, te, payload.

        Rows are in storage order; removals permute it.  The view aliases
        live storage, so treat it as read-only and short-lived.
        """
        return self._rows[: len(self._keys)]

    def scan(self, visitor: Callable[[IntervalTuple], None]) -> None:
        """Visit every live tuple once, in storage order."""
        for row in self.rows().tolist():
            visitor(IntervalTuple(*row))

    def scan_sum(self, column: int = 1) -> int:
        """Aggregate one storage column over all live tuples.

        Runs as one sequential pass over the packed rows; this is the
        fastest scan the layout admits (columns: 0 id, 1 ts, 2 te,
        3 payload).
        """
        return int(self.rows()[:, column].sum())

    def snapshot(self) -> List[IntervalTuple]:
        """The live tuples as a flat list (a copy of the contiguous storage)."""
        return [IntervalTuple(*row) for row in self.rows().tolist()]

    def iter_tuples(self) -> Iterator[IntervalTuple]:
        return (IntervalTuple(*row) for row in self.rows().tolist())

    def keys(self) -> List[int]:
        return self._keys[:]

    def chain_length(self, key: int) -> int:
        """Length of the bucket chain that ``key`` hashes into."""
        cur = self._buckets[self._bucket(key)]
        n = 0
        while cur != _EMPTY:
            n += 1
            cur = self._next[cur]
        return n

    def _grow(self) -> None:
        self._nbuckets *= 2
        self._shift -= 1
        nb = self._nbuckets
        buckets = self._buckets = [_EMPTY] * nb
        nxt = self._next
        prv = self._prev
        shift = self._shift
        for pos, key in enumerate(self._keys):
            b = (key * _FIB & _M64) >> shift
            head = buckets[b]
            nxt[pos] = head
            prv[pos] = -b - 1
            if head != _EMPTY:
                prv[head] = pos
            buckets[b] = pos

    def audit(self) -> None:
        """Full structural check; raises AssertionError on any violation."""
        n = len(self._keys)
        assert len(self._next) == len(self._prev) == n
        assert len(self._rows) >= n
        assert len(set(self._keys)) == n, "duplicate keys in storage"
        # Every live key reachable through its bucket chain.
        for pos, key in enumerate(self._keys):
            cur = self._buckets[self._bucket(key)]
            seen = 0
            while cur != _EMPTY and cur != pos:
                cur = self._next[cur]
                seen += 1
                assert seen <= n, "cycle in bucket chain"
            assert cur == pos, f"key {key} not reachable from its bucket"
        # Back-reference integrity: prev then forward returns to the element.
        for pos in range(n):
            p = self._prev[pos]
            if p >= 0:
                assert self._next[p] == pos, "broken predecessor link"
            else:
                assert self._buckets[-p - 1] == pos, "broken bucket head link"


class _Node:
    __slots__ = ("key", "value", "bucket_next", "list_prev", "list_next")

    def __init__(self, key: int, value: IntervalTuple):
        self.key = key
        self.value = value
        self.bucket_next: "_Node | None" = None
        self.list_prev: "_Node | None" = None
        self.list_next: "_Node | None" = None


class ChainedMapBaseline:
    """Linked-hash-map baseline: individually allocated, pointer-linked nodes."""

    __slots__ = ("_buckets", "_nbuckets", "_shift", "_head", "_tail", "_len")

    def __init__(self, nbuckets: int = 16, debug: bool = False):
        if nbuckets & (nbuckets - 1):
            raise ValueError("bucket count must be a power of two")
        self._nbuckets = nbuckets
        self._shift = 64 - nbuckets.bit_length() + 1
        self._buckets: List[_Node | None] = [None] * nbuckets
        self._head: _Node | None = None
        self._tail: _Node | None = None
        self._len = 0

    def __len__(self) -> int:
        return self._len

    def _find(self, key: int) -> "_Node | None":
        node = self._buckets[(key * _FIB & _M64) >> self._shift]
        while node is not None:
            if node.key == key:
                return node
            node = node.bucket_next
        return None

    def insert(self, key: int, tup: IntervalTuple) -> None:
        b = (key * _FIB & _M64) >> self._shift
        node = _Node(key, tup)
        node.bucket_next = self._buckets[b]
        self._buckets[b] = node
        if self._tail is None:
            self._head = self._tail = node
        else:
            node.list_prev = self._tail
            self._tail.list_next = node
            self._tail = node
        self._len += 1
        if self._len > (self._nbuckets >> 2) * 3:
            self._grow()

    def remove(self, key: int) -> bool:
        b = (key * _FIB & _M64) >> self._shift
        node = self._buckets[b]
        prev = None
        while node is not None and node.key != key:
            prev = node
            node = node.bucket_next
        if node is None:
            return False
        if prev is None:
            self._buckets[b] = node.bucket_next
        else:
            prev.bucket_next = node.bucket_next
        lp, ln = node.list_prev, node.list_next
        if lp is None:
            self._head = ln
        else:
            lp.list_next = ln
        if ln is None:
            self._tail = lp
        else:
            ln.list_prev = lp
        self._len -= 1
        return True

    def contains(self, key: int) -> bool:
        return self._find(key) is not None

    def get(self, key: int) -> IntervalTuple | None:
        node = self._find(key)
        return None if node is None else node.value

    def scan(self, visitor: Callable[[IntervalTuple], None]) -> None:
        node = self._head
        while node is not None:
            visitor(node.value)
            node = node.list_next

    def scan_sum(self, column: int = 1) -> int:
        """Aggregate one tuple field over all live entries.

        Has to chase the per-node links; there is no packed storage to
        stream over.
        """
        total = 0
        node = self._head
        while node is not None:
            total += node.value[column]
            node = node.list_next
        return total

    def snapshot(self) -> List[IntervalTuple]:
        out = []
        node = self._head
        while node is not None:
            out.append(node.value)
            node = node.list_next
        return out

    def iter_tuples(self) -> Iterator[IntervalTuple]:
        node = self._head
        while node is not None:
            yield node.value
            node = node.list_next

    def _grow(self) -> None:
        self._nbuckets *= 2
        self._shift -= 1
        shift = self._shift
        buckets = self._buckets = [None] * self._nbuckets
        node = self._head
        while node is not None:
            b = (node.key * _FIB & _M64) >> shift
            node.bucket_next = buckets[b]
            buckets[b] = node
            node = node.list_next
