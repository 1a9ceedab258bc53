"""Brute-force ground truth for small instances.

Everything here is computed straight from the definitions: every ordering of
every store subset, pairwise conventional dominance, and segment tests
against every pair of skyline points for linear dominance.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .catalog import prune_stores, satisfies_list, shopping_cost
from .network import INF, multi_target_fastest_paths, precompute_store_pair_times
from .skyline import CostVector, conventionally_dominates


class OracleLimitError(ValueError):
    pass


@dataclass
class OracleResult:
    routes: list          # (stores tuple, st_ms, sc_cents) for every feasible ordering
    conventional: list    # CostVector, ascending st, duplicates collapsed
    linear: list

    def route_for(self, cv):
        for stores, st, sc in self.routes:
            if (st, sc) == tuple(cv):
                return stores
        return None


def brute_force_skylines(query, catalog, net, max_stores=7) -> OracleResult:
    lst = query.shopping_list
    stores = prune_stores(catalog, lst)
    if len(stores) > max_stores:
        raise OracleLimitError(
            f"{len(stores)} relevant stores exceed the oracle limit of {max_stores}")
    vertex = {s.store_id: s.vertex for s in stores}
    verts = set(vertex.values())
    from_shopper = multi_target_fastest_paths(net, query.shopper, verts | {query.delivery})
    to_delivery = multi_target_fastest_paths(net, query.delivery, verts)
    pair = precompute_store_pair_times(net, verts)
    table = catalog.price_table

    routes = []
    ids = [s.store_id for s in stores]
    for k in range(1, len(ids) + 1):
        for seq in permutations(ids, k):
            if not satisfies_list(lst, seq, table):
                continue
            st = from_shopper[vertex[seq[0]]]
            for a, b in zip(seq, seq[1:]):
                st += pair(vertex[a], vertex[b])
            st += to_delivery[vertex[seq[-1]]]
            if st == INF:
                continue
            sc, _ = shopping_cost(seq, lst, table)
            routes.append((seq, st, sc))

    vectors = sorted({CostVector(st, sc) for _, st, sc in routes})
    conventional = [p for p in vectors
                    if not any(conventionally_dominates(q, p) for q in vectors)]
    linear = [p for p in conventional if not _below_some_pair(p, conventional)]
    return OracleResult(routes, conventional, linear)


def _below_some_pair(p, points):
    # p is dropped when it lies on or above the segment joining two other points
    for a in points:
        if a.st >= p.st:
            continue
        for b in points:
            if b.st <= p.st:
                continue
            if (b.st - a.st) * (p.sc - a.sc) - (b.sc - a.sc) * (p.st - a.st) >= 0:
                return True
    return False


def count_sequences(n):
    """Number of ordered non-empty store subsets of ``n`` stores."""
    total, term = 0, 1
    for k in range(1, n + 1):
        term *= n - k + 1
        total += term
    return total


def grid_area(vectors, resolution=1000) -> float:
    """Sampled area of the region not dominated by ``vectors`` inside their box.

    The box spans [0, largest st] x [0, largest sc]; a cell counts when its
    centre is not weakly dominated by any point.
    """
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    pts = list(vectors)
    width = max(p.st for p in pts)
    height = max(p.sc for p in pts)
    if width <= 0 or height <= 0:
        return 0.0
    xs = (np.arange(resolution) + 0.5) * (width / resolution)
    ys = (np.arange(resolution) + 0.5) * (height / resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    dominated = np.zeros(X.shape, dtype=bool)
    for p in pts:
        dominated |= (X >= p.st) & (Y >= p.sc)
    return float((~dominated).mean() * width * height)


def grid_cover_area(a, b, resolution=1000) -> float:
    """Sampled area of the intersection of the two non-dominated regions."""
    if resolution < 100:
        raise ValueError("resolution must be at least 100")
    a, b = list(a), list(b)
    width = min(max(p.st for p in a), max(p.st for p in b))
    height = min(max(p.sc for p in a), max(p.sc for p in b))
    if width <= 0 or height <= 0:
        return 0.0
    xs = (np.arange(resolution) + 0.5) * (width / resolution)
    ys = (np.arange(resolution) + 0.5) * (height / resolution)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    dominated = np.zeros(X.shape, dtype=bool)
    for p in a + b:
        dominated |= (X >= p.st) & (Y >= p.sc)
    return float((~dominated).mean() * width * height)
