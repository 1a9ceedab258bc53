"""Heuristic solver: score-driven depth-first search over a store quad-tree.

Routes are assembled leaf by leaf. Each visited leaf contributes short
routes over its own stores that buy exactly the still-missing products it
offers; these are appended to every partial route gathered so far. The
search stops descending as soon as the partial routes cover the list.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, permutations

from .network import INF
from .quadtree import StoreQuadTree
from .routes import QueryContext, st_of_min_cost_route
from .skyline import CostVector, LinearSkyline


def score_quadrant(st_via, listed, quadrant, st_upper, max_price):
    """Promise of ``quadrant`` for the products in ``listed`` (lower is better).

    ``st_via`` is the time to reach the quadrant from the current origin plus
    the time from the quadrant to the delivery location. The travel term is
    normalised by ``st_upper`` and each offered product's average price by
    ``max_price``; a quadrant offering none of ``listed`` scores infinity.
    """
    prices = [quadrant.average_price(p) for p in listed if quadrant.offers(p)]
    if not prices:
        return INF
    return st_via / st_upper + sum(c / max_price for c in prices) / len(prices)


@dataclass
class Partial:
    seq: tuple
    open_t: int            # shopper -> ... -> last store
    prices: tuple          # best cents per listed product slot, INF if not bought yet
    sc: int                # cost of the covered products

    @property
    def last(self):
        return self.seq[-1] if self.seq else None


@dataclass
class ApxStats:
    leaves_visited: int = 0
    partial_routes_peak: int = 0
    rescore_calls: int = 0
    complete_routes: int = 0
    fallback: bool = False
    wall_ms: float = 0.0

    def to_json(self):
        return {"leaves_visited": self.leaves_visited,
                "partial_routes_peak": self.partial_routes_peak,
                "rescore_calls": self.rescore_calls, "complete_routes": self.complete_routes,
                "fallback": self.fallback, "wall_ms": round(self.wall_ms, 3)}


@dataclass
class ApxResult:
    skyline: LinearSkyline
    stats: ApxStats
    st_upper: int
    context: QueryContext = field(repr=False, default=None)

    @property
    def routes(self):
        return [e.payload for e in self.skyline]


def irredundant_covers(stores, masks, target, limit=None):
    """Store subsets whose product masks OR to ``target`` with no store removable.

    Yielded smallest first, then in store order.
    """
    found = 0
    for size in range(1, len(stores) + 1):
        for combo in combinations(stores, size):
            acc = 0
            for s in combo:
                acc |= masks[s]
            if acc != target:
                continue
            if size > 1 and any(_or_except(combo, masks, k) == target for k in range(size)):
                continue
            yield combo
            found += 1
            if limit is not None and found >= limit:
                return


def _or_except(combo, masks, k):
    acc = 0
    for i, s in enumerate(combo):
        if i != k:
            acc |= masks[s]
    return acc


class Explorer:
    """One query's depth-first exploration state (PR, missing products, candidates)."""

    def __init__(self, ctx: QueryContext, tree: StoreQuadTree, st_upper, *, exact_orders=5,
                 max_covers=256, pr_cap=512):
        self.ctx = ctx
        self.tree = tree
        self.st_upper = st_upper
        self.exact_orders = exact_orders
        self.max_covers = max_covers
        self.pr_cap = pr_cap
        self.stats = ApxStats()
        self.pr: list[Partial] = []
        self.covered = 0            # bitmask over listed product slots
        self.full = (1 << ctx.m) - 1
        self.end_leaf = None        # leaf the partial routes currently end in
        self.complete = []          # (CostVector, seq)
        self.masks = [sum(1 << j for j in range(ctx.m) if ctx.price[j][i] is not None)
                      for i in range(ctx.n)]
        # quadrant -> query stores inside it
        local = {}
        for node in tree.nodes:
            local[node.node_id] = [ctx.index_of[s] for s in node.stores if s in ctx.index_of]
        self.local = local
        self._pair_cache = {}
        self.norm_sc = ctx.max_price * sum(ctx.qty)

    # -- travel times between the query and quadrants -------------------------------
    def _to_quadrant(self, times, node):
        return min((times[i] for i in self.local[node.node_id]), default=INF)

    def _leaf_to_quadrant(self, leaf, node):
        key = (leaf.node_id, node.node_id)
        if key not in self._pair_cache:
            t = self.ctx.t
            self._pair_cache[key] = min((t[a][b] for a in self.local[leaf.node_id]
                                         for b in self.local[node.node_id]), default=INF)
        return self._pair_cache[key]

    def missing(self):
        return [self.ctx.products[j] for j in range(self.ctx.m) if not self.covered >> j & 1]

    def score(self, node, listed):
        ctx = self.ctx
        if self.end_leaf is None:
            start = self._to_quadrant(ctx.t_start, node)
        else:
            start = self._leaf_to_quadrant(self.end_leaf, node)
        st_via = start + self._to_quadrant(ctx.t_end, node)
        if st_via == INF:
            return INF
        return score_quadrant(st_via, listed, node, self.st_upper, ctx.max_price)

    # -- Explore ----------------------------------------------------------------------
    def explore(self, node):
        listed = self.missing()
        if not listed:
            return
        if node.is_leaf:
            self.compute_partition_routes(node)
            return
        scores = {}
        for c in node.children:
            s = self.score(c, listed)
            if s != INF:
                scores[c.node_id] = (s, c)
        while scores:
            cid = min(scores, key=lambda k: (scores[k][0], k))
            child = scores.pop(cid)[1]
            self.explore(child)
            listed = self.missing()
            if not listed:
                break
            self.stats.rescore_calls += 1
            rescored = {}
            for k, (_, c) in scores.items():
                s = self.score(c, listed)
                if s != INF:
                    rescored[k] = (s, c)
            scores = rescored

    # -- leaf routes ------------------------------------------------------------------
    def leaf_routes(self, stores, origin_times):
        """Orderings of irredundant covers of the leaf's missing products.

        Covers with at most ``exact_orders`` stores keep, for each (first, last)
        pair, their fastest ordering; larger covers get one nearest-neighbour order
        from the current origin. Returns ``(seq, internal_time)`` pairs.
        """
        ctx = self.ctx
        need = self.full & ~self.covered
        masks = {i: self.masks[i] & need for i in stores}
        target = 0
        for i in stores:
            target |= masks[i]
        t = ctx.t
        out = []
        for cover in irredundant_covers(stores, masks, target, self.max_covers):
            if len(cover) <= self.exact_orders:
                best = {}
                for perm in permutations(cover):
                    inner = 0
                    for a, b in zip(perm, perm[1:]):
                        inner += t[a][b]
                    key = (perm[0], perm[-1])
                    if key not in best or inner < best[key][1]:
                        best[key] = (perm, inner)
                out.extend(best[k] for k in sorted(best))
            else:
                left = set(cover)
                cur = min(left, key=lambda i: (origin_times[i], ctx.ids[i]))
                seq, inner = [cur], 0
                left.remove(cur)
                while left:
                    nxt = min(left, key=lambda i: (t[cur][i], ctx.ids[i]))
                    inner += t[cur][nxt]
                    seq.append(nxt)
                    left.remove(nxt)
                    cur = nxt
                out.append((tuple(seq), inner))
        return out, target

    def compute_partition_routes(self, leaf):
        ctx = self.ctx
        need = self.full & ~self.covered
        stores = [i for i in self.local[leaf.node_id] if self.masks[i] & need]
        self.stats.leaves_visited += 1
        if not stores:
            return
        base = self.pr or [Partial((), 0, (INF,) * ctx.m, 0)]
        if self.pr:
            origin_times = {i: min(ctx.t[p.last][i] for p in base) for i in stores}
        else:
            origin_times = {i: ctx.t_start[i] for i in stores}
        routes, gained = self.leaf_routes(stores, origin_times)
        covered = self.covered | gained
        done = covered == self.full
        qty = ctx.qty
        merged = {}
        for p in base:
            for seq, inner in routes:
                first = seq[0]
                lead = ctx.t_start[first] if p.last is None else ctx.t[p.last][first]
                open_t = p.open_t + lead + inner
                st = open_t + ctx.t_end[seq[-1]]
                if st > self.st_upper:
                    continue
                prices = list(p.prices)
                for i in seq:
                    for j in range(ctx.m):
                        c = ctx.price[j][i]
                        if c is not None and c < prices[j]:
                            prices[j] = c
                full_seq = p.seq + seq
                key = (frozenset(full_seq), full_seq[-1])
                old = merged.get(key)
                if old is not None and old.open_t <= open_t:
                    continue
                sc = sum(prices[j] * qty[j] for j in range(ctx.m) if covered >> j & 1)
                merged[key] = Partial(full_seq, open_t, tuple(prices), sc)
        if not merged:
            # every combination breaks the time bound: treat the leaf like a barren one
            return
        partials = sorted(merged.values(), key=lambda p: (p.open_t, p.sc, p.seq))
        if done:
            for p in partials:
                self.complete.append((CostVector(p.open_t + ctx.t_end[p.last], p.sc), p.seq))
            self.stats.complete_routes += len(partials)
        self.stats.partial_routes_peak = max(self.stats.partial_routes_peak, len(partials))
        if len(partials) > self.pr_cap:
            norm_st, norm_sc = self.st_upper, self.norm_sc

            def beam_key(p):
                return ((p.open_t + ctx.t_end[p.last]) / norm_st + p.sc / norm_sc, p.seq)

            partials = sorted(partials, key=beam_key)[:self.pr_cap]
        self.pr = partials
        self.covered = covered
        self.end_leaf = leaf


def solve_apx(query, catalog, net, tree: StoreQuadTree, store_times=None, **options) -> ApxResult:
    ctx = QueryContext(query, catalog, net, store_times)
    return solve_apx_ctx(ctx, tree, **options)


def solve_apx_ctx(ctx: QueryContext, tree: StoreQuadTree, *, exact_limit=8, exact_orders=5,
                  max_covers=256, pr_cap=512, include_min_cost=True) -> ApxResult:
    t0 = time.perf_counter()
    st_upper, min_cost_order = st_of_min_cost_route(ctx, exact_limit)
    ex = Explorer(ctx, tree, st_upper, exact_orders=exact_orders, max_covers=max_covers,
                  pr_cap=pr_cap)
    ex.explore(tree.root)
    candidates = list(ex.complete)
    if not candidates:
        ex.stats.fallback = True
    if include_min_cost or not candidates:
        candidates.append((CostVector(st_upper, ctx.sc_min), min_cost_order))
    skyline = LinearSkyline.build([(cv, seq) for cv, seq in candidates])
    for k, e in enumerate(skyline.entries):
        skyline.entries[k] = e._replace(payload=ctx.make_route(e.payload))
    ex.stats.wall_ms = (time.perf_counter() - t0) * 1000
    return ApxResult(skyline, ex.stats, st_upper, ctx)
