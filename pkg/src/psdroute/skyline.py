"""Linear skyline of (shopping time, shopping cost) vectors.

Times are integer milliseconds and costs integer cents, so every domination
test below is exact.
"""
from __future__ import annotations

from typing import Any, NamedTuple


class CostVector(NamedTuple):
    st: int
    sc: int


class OrderViolation(ValueError):
    """A candidate arrived with a shopping time below the skyline's last entry."""


def conventionally_dominates(a, b) -> bool:
    return (a.sc < b.sc and a.st <= b.st) or (a.sc <= b.sc and a.st < b.st)


def _cross(o, a, b):
    # z of (a - o) x (b - o) in (st, sc) space; > 0 means b lies left of o->a
    return (a.st - o.st) * (b.sc - o.sc) - (a.sc - o.sc) * (b.st - o.st)


def linearly_dominated(left, mid, right) -> bool:
    """True when ``mid`` is on or above segment left-right, or dominated by an end.

    Requires ``left.st <= mid.st <= right.st``. Points exactly on the segment
    count as dominated.
    """
    if conventionally_dominates(left, mid) or conventionally_dominates(right, mid):
        return True
    if mid == left or mid == right:
        return True
    if right.st == left.st:
        return mid.sc >= min(left.sc, right.sc)
    return _cross(left, right, mid) >= 0


class Entry(NamedTuple):
    cv: CostVector
    payload: Any = None


class LinearSkyline:
    """Entries ordered by strictly ascending st and strictly descending sc,
    forming a lower-left convex chain. Fed in non-decreasing st order."""

    def __init__(self):
        self.entries: list[Entry] = []
        self.accepted = 0
        self.evicted = 0

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __bool__(self):
        return bool(self.entries)

    @property
    def vectors(self):
        return [e.cv for e in self.entries]

    @property
    def last(self):
        return self.entries[-1] if self.entries else None

    @property
    def min_sc(self):
        return self.entries[-1].cv.sc if self.entries else None

    def try_insert(self, cv, payload=None) -> bool:
        cv = CostVector(*cv)
        entries = self.entries
        if entries:
            last = entries[-1].cv
            if cv.st < last.st:
                raise OrderViolation(
                    f"candidate st={cv.st} arrived after an entry with st={last.st}")
            if cv.sc >= last.sc:
                return False
            if last.st == cv.st:
                entries.pop()
                self.evicted += 1
        while len(entries) >= 2 and linearly_dominated(entries[-2].cv, entries[-1].cv, cv):
            entries.pop()
            self.evicted += 1
        entries.append(Entry(cv, payload))
        self.accepted += 1
        return True

    @classmethod
    def build(cls, candidates):
        """Skyline of ``(cv, payload)`` pairs given in any order.

        Sorting by (st, sc) first satisfies the insertion order contract; among
        equal vectors the earliest candidate wins.
        """
        ls = cls()
        indexed = sorted(enumerate(candidates), key=lambda e: (e[1][0][0], e[1][0][1], e[0]))
        for _, (cv, payload) in indexed:
            ls.try_insert(cv, payload)
        return ls

    def to_json(self):
        return [e.payload.to_json() if hasattr(e.payload, "to_json")
                else {"st_ms": e.cv.st, "sc_cents": e.cv.sc} for e in self.entries]


def on_or_above_chain(chain, p) -> bool:
    """Whether point ``p`` lies on or above the convex chain ``chain``.

    ``chain`` is a linear skyline's vectors in st order. Left of the chain
    nothing can lie; right of it the chain extends flat at its last sc.
    """
    if not chain:
        return True
    if p.st < chain[0].st:
        return False
    if p.st >= chain[-1].st:
        return p.sc >= chain[-1].sc
    for a, b in zip(chain, chain[1:]):
        if a.st <= p.st <= b.st:
            return _cross(a, b, p) >= 0
    return True
