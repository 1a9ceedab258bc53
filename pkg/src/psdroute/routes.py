"""Per-query state shared by the exact and heuristic solvers.

A :class:`QueryContext` runs the two single-source searches of a query,
keeps the stores that sell something on the list and can be reached, and
indexes them 0..n-1 so the solvers can work with flat lists.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import (Catalog, InfeasibleListError, ShoppingList, build_indexes,
                      min_cost_assignment, prune_stores, shopping_list_from_json)
from .network import INF, RoadNetwork, multi_target_fastest_paths, precompute_store_pair_times
from .skyline import CostVector


class UnreachableError(ValueError):
    pass


@dataclass(frozen=True)
class PsdQuery:
    shopper: int
    delivery: int
    shopping_list: ShoppingList

    @classmethod
    def from_json(cls, doc):
        try:
            return cls(int(doc["shopper_vertex"]), int(doc["delivery_vertex"]),
                       shopping_list_from_json(doc["list"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad query document: missing or malformed {exc}") from exc

    def to_json(self):
        return {"shopper_vertex": self.shopper, "delivery_vertex": self.delivery,
                "list": self.shopping_list.to_json()}


def load_queries(path):
    """A query file holds one query object or an array of them."""
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, list):
        return [PsdQuery.from_json(d) for d in doc]
    return [PsdQuery.from_json(doc)]


@dataclass
class ShoppingRoute:
    stores: tuple
    st: int
    sc: int
    assignment: dict = field(default_factory=dict)
    detour_ranks: tuple = ()

    @property
    def cv(self):
        return CostVector(self.st, self.sc)

    def to_json(self):
        return {
            "st_seconds": self.st / 1000,
            "sc_cents": self.sc,
            "stores": list(self.stores),
            "assignment": {p: s for p, (s, _) in sorted(self.assignment.items())},
        }


class QueryContext:
    """Query-local view: reachable relevant stores and their travel times (ms)."""

    def __init__(self, query: PsdQuery, catalog: Catalog, net: RoadNetwork, store_times=None):
        self.query = query
        self.catalog = catalog
        net.check_vertex(query.shopper)
        net.check_vertex(query.delivery)
        catalog.check_network(net)
        lst = query.shopping_list
        # fail early with the full catalog in view
        min_cost_assignment(catalog.product_index, lst)

        candidates = prune_stores(catalog, lst)
        verts = {s.vertex for s in candidates}
        from_shopper = multi_target_fastest_paths(net, query.shopper, verts | {query.delivery})
        self.direct = from_shopper[query.delivery]
        if self.direct == INF:
            raise UnreachableError(
                f"delivery vertex {query.delivery} unreachable from {query.shopper}")
        to_delivery = multi_target_fastest_paths(net, query.delivery, verts)

        self.stores = [s for s in candidates
                       if from_shopper[s.vertex] != INF and to_delivery[s.vertex] != INF]
        self.ids = [s.store_id for s in self.stores]
        self.n = len(self.stores)
        self.index_of = {sid: i for i, sid in enumerate(self.ids)}
        self.t_start = [from_shopper[s.vertex] for s in self.stores]
        self.t_end = [to_delivery[s.vertex] for s in self.stores]
        if store_times is None:
            store_times = precompute_store_pair_times(net, {s.vertex for s in self.stores})
        self.t = [[store_times(a.vertex, b.vertex) for b in self.stores] for a in self.stores]

        self.products = lst.products
        self.qty = [q for _, q in lst]
        self.m = len(self.products)
        # price[j][i]: cents for listed product j at store i, None if not sold
        self.price = [[s.prices.get(p) for s in self.stores] for p in self.products]
        self.sold_by = [[i for i in range(self.n) if self.price[j][i] is not None]
                        for j in range(self.m)]
        self.index, self.price_table = build_indexes(self.stores)
        missing = [p for j, p in enumerate(self.products) if not self.sold_by[j]]
        if missing:
            raise InfeasibleListError(missing, context="stores reachable from the query")
        sc_set, sc_assign, self.sc_min = min_cost_assignment(self.index, lst)
        self.min_cost_stores = tuple(sorted(self.index_of[s] for s in sc_set))
        self.min_cost_assignment = sc_assign
        self.max_price = max(c for row in self.price for c in row if c is not None)

    def route_time(self, seq) -> int:
        """Shopping time of a sequence of store indices."""
        if not seq:
            return self.direct
        total = self.t_start[seq[0]]
        for a, b in zip(seq, seq[1:]):
            total += self.t[a][b]
        return total + self.t_end[seq[-1]]

    def route_cost(self, seq):
        """``(cents, assignment)`` buying each product at its cheapest store on
        the route (first visited wins ties); cents is None if infeasible."""
        total = 0
        assignment = {}
        for j, p in enumerate(self.products):
            row = self.price[j]
            best = None
            for i in seq:
                c = row[i]
                if c is not None and (best is None or c < best[1]):
                    best = (i, c)
            if best is None:
                return None, None
            assignment[p] = (self.ids[best[0]], best[1])
            total += best[1] * self.qty[j]
        return total, assignment

    def make_route(self, seq, detour_ranks=()) -> ShoppingRoute:
        sc, assignment = self.route_cost(seq)
        return ShoppingRoute(tuple(self.ids[i] for i in seq), self.route_time(seq), sc,
                             assignment, tuple(detour_ranks))


def best_visiting_order(ctx: QueryContext, stores, exact_limit=8):
    """Fastest order to visit ``stores`` between shopper and delivery.

    Exact (Held-Karp) for up to ``exact_limit`` stores, nearest-neighbour
    beyond. Returns ``(shopping_time_ms, order)``.
    """
    stores = sorted(stores)
    k = len(stores)
    if k == 0:
        return ctx.direct, ()
    if k <= exact_limit:
        return held_karp(ctx, stores)
    order = []
    left = set(stores)
    cur_times = {i: ctx.t_start[i] for i in left}
    while left:
        nxt = min(left, key=lambda i: (cur_times[i], ctx.ids[i]))
        order.append(nxt)
        left.remove(nxt)
        cur_times = {i: ctx.t[nxt][i] for i in left}
    return ctx.route_time(order), tuple(order)


_BIG = 1 << 60       # stands in for "no path yet"; exact int64 arithmetic throughout
_LAYERS = {}         # k -> per popcount, masks of that size as index arrays


def _layers(k):
    hit = _LAYERS.get(k)
    if hit is None:
        counts = np.array([bin(x).count("1") for x in range(1 << k)])
        hit = _LAYERS[k] = [np.nonzero(counts == p)[0] for p in range(k + 1)]
    return hit


def held_karp(ctx: QueryContext, stores):
    """Fastest visiting order of ``stores`` between shopper and delivery.

    Dynamic programme over (visited subset, last store), one subset size at a
    time, in exact integer arithmetic.
    """
    stores = sorted(stores)
    k = len(stores)
    if k == 0:
        return ctx.direct, ()
    if any(ctx.t_start[s] == INF or ctx.t_end[s] == INF for s in stores):
        return INF, tuple(stores)
    tt = np.array([[ctx.t[a][b] if ctx.t[a][b] != INF else _BIG for b in stores]
                   for a in stores], dtype=np.int64)
    size = 1 << k
    dp = np.full((size, k), _BIG, dtype=np.int64)
    for a, s in enumerate(stores):
        dp[1 << a, a] = ctx.t_start[s]
    layers = _layers(k)
    for p in range(2, k + 1):
        masks = layers[p]
        for j in range(k):
            bit = 1 << j
            sel = masks[(masks & bit) != 0]
            prev = dp[sel ^ bit]                      # (len(sel), k)
            dp[sel, j] = np.minimum((prev + tt[:, j]).min(axis=1), _BIG)
    full = size - 1
    ends = dp[full] + np.array([ctx.t_end[s] for s in stores], dtype=np.int64)
    last = int(np.argmin(ends))
    best = int(ends[last])
    order = [last]
    mask = full
    while mask != (1 << last):
        prev_mask = mask ^ (1 << last)
        want = dp[mask, last]
        cand = dp[prev_mask] + tt[:, last]
        nxt = int(np.nonzero(cand == want)[0][0])
        order.append(nxt)
        mask, last = prev_mask, nxt
    order.reverse()
    return best, tuple(stores[i] for i in order)


def _hk_table(tt, init):
    """``dp[mask, j]``: fastest path from the origin through ``mask`` ending at ``j``."""
    k = len(init)
    dp = np.full((1 << k, k), _BIG, dtype=np.int64)
    for a in range(k):
        dp[1 << a, a] = init[a]
    layers = _layers(k)
    for p in range(2, k + 1):
        masks = layers[p]
        for j in range(k):
            bit = 1 << j
            sel = masks[(masks & bit) != 0]
            dp[sel, j] = np.minimum((dp[sel ^ bit] + tt[:, j]).min(axis=1), _BIG)
    return dp


def st_of_min_cost_route(ctx: QueryContext, exact_limit=8):
    """Shopping-time upper bound: time of the cheapest store set in its best found order."""
    return best_visiting_order(ctx, ctx.min_cost_stores, exact_limit)
