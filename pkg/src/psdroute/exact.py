"""Exact linear skyline by branch and bound over store sets.

Every route's cost vector is weakly dominated by that of its store set
visited in the fastest order, and every store set contains an *irredundant*
one (each store is the cheapest on the route for some listed product) with
the same cost and no larger time. So the skyline can be computed over
irredundant sets only.

Sets are built product by product: the ``k``-th product is assigned to its
owner, the cheapest store of the final set (ties to the lower store index).
The owner is either already in the set or added now, in which case it must
not undercut any product assigned before. Each irredundant set is produced
exactly once.

A branch is dropped when its lower-bound corner (fastest time over the
chosen stores; cost so far plus the cheapest possible completion) lies strictly above the lower hull of feasible points
found so far. Time is exact at every node: each set keeps Held-Karp path
tables from the shopper and from the delivery location, and the time of the
set plus one store is read off them in a single vectorised pass.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .network import INF
from .routes import _BIG, QueryContext, _hk_table, held_karp, st_of_min_cost_route
from .skyline import CostVector, LinearSkyline


@dataclass
class ExactStats:
    nodes: int = 0
    leaves: int = 0
    tsp_solved: int = 0
    wall_ms: float = 0.0

    def to_json(self):
        return {"nodes": self.nodes, "leaves": self.leaves, "tsp_solved": self.tsp_solved,
                "wall_ms": round(self.wall_ms, 3)}


@dataclass
class ExactResult:
    skyline: LinearSkyline
    stats: ExactStats
    st_upper: int
    sc_min: int
    context: QueryContext = None

    @property
    def routes(self):
        return [e.payload for e in self.skyline]


class _Hull:
    """Lower convex chain of feasible points, queried for 'strictly above'."""

    def __init__(self, points):
        self.points = list(points)
        self.chain = []
        self._rebuild()

    def _rebuild(self):
        self.chain = LinearSkyline.build([(p, None) for p in self.points]).vectors

    def add(self, p):
        if not self.above(p.st, p.sc):
            self.points.append(p)
            self._rebuild()

    def above(self, st, sc):
        """True when every point at or right of ``st`` with cost ``>= sc`` sits
        strictly above the chain (so nothing there can join the skyline)."""
        chain = self.chain
        if not chain or st < chain[0].st:
            return False
        last = chain[-1]
        if st >= last.st:
            return sc > last.sc
        lo, hi = 0, len(chain) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if chain[mid].st <= st:
                lo = mid
            else:
                hi = mid
        a, b = chain[lo], chain[hi]
        return (sc - a.sc) * (b.st - a.st) > (b.sc - a.sc) * (st - a.st)


class _SetNode:
    """A chosen store set with lazily built path tables in both directions."""

    __slots__ = ("members", "st", "_tables")

    def __init__(self, members, st):
        self.members = members      # sorted tuple of store indices
        self.st = st                # exact fastest shopping time over the set
        self._tables = None

    def tables(self, big_t, t_start, t_end):
        if self._tables is None:
            idx = np.array(self.members, dtype=np.int64)
            tt = big_t[np.ix_(idx, idx)]
            fwd = _hk_table(tt, [t_start[i] for i in self.members])
            bwd = _hk_table(tt, [t_end[i] for i in self.members])
            self._tables = (idx, fwd, bwd)
        return self._tables


def solve_exact_ctx(ctx: QueryContext, *, exact_limit=8, seeds=None) -> ExactResult:
    from .bsl import seed_points

    t0 = time.perf_counter()
    stats = ExactStats()
    n, m, qty, price = ctx.n, ctx.m, ctx.qty, ctx.price
    st_upper, sc_order = st_of_min_cost_route(ctx, exact_limit)
    known = list(seeds) if seeds is not None else seed_points(ctx, sc_order)
    known.append(CostVector(st_upper, ctx.sc_min))
    hull = _Hull(known)

    # products with the widest price spread first: their cost is fixed early
    def spread(j):
        cs = [c for c in price[j] if c is not None]
        return (-(max(cs) - min(cs)) * qty[j], j)

    order = sorted(range(m), key=spread)
    sellers = [sorted((i for i in range(n) if price[j][i] is not None),
                      key=lambda i: (price[j][i], i)) for j in order]
    prices = [[price[j][i] for i in range(n)] for j in order]
    q = [qty[j] for j in order]
    cheapest = [prices[k][sellers[k][0]] * q[k] for k in range(m)]
    rest_floor = [0] * (m + 1)
    for k in range(m - 1, -1, -1):
        rest_floor[k] = rest_floor[k + 1] + cheapest[k]

    leaves = []     # (CostVector, store set)
    big_t = np.array([[c if c != INF else _BIG for c in row] for row in ctx.t], dtype=np.int64)
    t_start, t_end = ctx.t_start, ctx.t_end
    set_times = {}

    def extend(node, s):
        """Exact shopping time of ``node``'s set plus store ``s``.

        The new store sits between a visited prefix X and the remaining
        stores, so the time is the best over X of (shopper -> X -> s) plus
        (s -> rest -> delivery), read off the node's two path tables.
        """
        key = node.members + (s,)
        key = tuple(sorted(key))
        hit = set_times.get(key)
        if hit is not None:
            return key, hit
        stats.tsp_solved += 1
        if not node.members:
            st = t_start[s] + t_end[s]
        else:
            idx, fwd, bwd = node.tables(big_t, t_start, t_end)
            col = big_t[idx, s]
            into = (fwd + col).min(axis=1)
            into[0] = t_start[s]
            out = (bwd + col).min(axis=1)
            out[0] = t_end[s]
            full = len(into) - 1
            st = int((into + out[full ^ np.arange(full + 1)]).min())
        set_times[key] = st
        return key, st

    def owner_in(chosen, k):
        # canonical owner of product k within ``chosen``
        best = None
        for i in chosen:
            c = prices[k][i]
            if c is not None and (best is None or c < prices[k][best]
                                  or (c == prices[k][best] and i < best)):
                best = i
        return best

    def steals(s, chosen_owner, k):
        # would adding s take over a product assigned before position k?
        for a in range(k):
            c = prices[a][s]
            if c is None:
                continue
            o = chosen_owner[a]
            oc = prices[a][o]
            if c < oc or (c == oc and s < o):
                return True
        return False

    def dfs(k, node, chosen, owners, cost):
        stats.nodes += 1
        if k == m:
            stats.leaves += 1
            cv = CostVector(node.st, cost)
            leaves.append((cv, node.members))
            hull.add(cv)
            return
        cur = owner_in(chosen, k)
        options = []
        if cur is not None:
            options.append((prices[k][cur], cur, False))
        for s in sellers[k]:
            c = prices[k][s]
            if cur is not None and (c > prices[k][cur] or (c == prices[k][cur] and s > cur)):
                break
            if s in chosen or steals(s, owners, k):
                continue
            options.append((c, s, True))
        options.sort(key=lambda o: (o[0], o[2], o[1]))
        for c, s, new in options:
            ncost = cost + c * q[k]
            floor = ncost + rest_floor[k + 1]
            if hull.above(node.st, floor):
                continue        # adding stores only makes it slower
            if new:
                key, st = extend(node, s)
                if st > st_upper or hull.above(st, floor):
                    continue
                child, nchosen = _SetNode(key, st), chosen | {s}
            else:
                child, nchosen = node, chosen
            owners.append(s)
            dfs(k + 1, child, nchosen, owners, ncost)
            owners.pop()

    dfs(0, _SetNode((), ctx.direct), frozenset(), [], 0)
    skyline = LinearSkyline.build(leaves)
    for idx, e in enumerate(skyline.entries):
        st, order = held_karp(ctx, e.payload)
        skyline.entries[idx] = e._replace(payload=ctx.make_route(order))
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return ExactResult(skyline, stats, st_upper, ctx.sc_min, ctx)
