"""Exact solver: candidate routes in non-decreasing shopping time.

Routes are generated through ranked minimum detours. A popped route
``<t1..tn>`` spawns

* its successor, appending the best-ranked detour store from ``tn``, and
* its sibling, swapping ``tn`` for the next-ranked detour store from ``t(n-1)``
  (or from the shopper for single-store routes).

Both children are never faster than their parent, so a min-heap pops
routes in non-decreasing shopping time and the skyline can be built with
the ordered insertion of :class:`~psdroute.skyline.LinearSkyline`.

Optional prunings, all exact with respect to the returned cost vectors:

``st_bound``
    drop children slower than the min-cost route's shopping time (ST^U).
``cost_bound``
    drop a subtree when no completion can fall below the lower hull of
    feasible points already known (accepted routes, the min-cost route and a
    few seed routes made by dropping stores from it).
``dominance``
    extend a (store set, last store) state only from its fastest ordering.
``skip_useless``
    never append a store that cannot lower the price of any listed product.
"""
from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field

from .network import INF
from .routes import QueryContext, st_of_min_cost_route
from .skyline import CostVector, LinearSkyline

log = logging.getLogger(__name__)

SHOPPER = None  # origin key of the shopper's location in detour rankings


@dataclass
class BslStats:
    popped: int = 0
    pushed: int = 0
    evicted: int = 0
    terminated_early: bool = False
    capped: bool = False
    wall_ms: float = 0.0
    pop_times: list = field(default_factory=list)

    def to_json(self):
        return {"popped": self.popped, "pushed": self.pushed, "evicted": self.evicted,
                "terminated_early": self.terminated_early, "capped": self.capped,
                "wall_ms": round(self.wall_ms, 3)}


@dataclass
class BslResult:
    skyline: LinearSkyline
    stats: BslStats
    st_upper: int
    sc_min: int
    context: QueryContext = field(repr=False, default=None)

    @property
    def routes(self):
        return [e.payload for e in self.skyline]


def build_detour_rankings(ctx: QueryContext):
    """Per origin (``SHOPPER`` or a store index), stores by ascending detour.

    The detour of store ``s`` from origin ``o`` is ranked by
    ``mTT(o, s) + mTT(s, delivery)``; ties go to the lower store id.
    """
    ids = ctx.ids
    rankings = {SHOPPER: sorted(range(ctx.n),
                                key=lambda s: (ctx.t_start[s] + ctx.t_end[s], ids[s]))}
    for o in range(ctx.n):
        row = ctx.t[o]
        rankings[o] = sorted((s for s in range(ctx.n) if s != o),
                             key=lambda s: (row[s] + ctx.t_end[s], ids[s]))
    return rankings


def min_detour(origin, exclude, rankings):
    """First store in ``origin``'s ranking outside ``exclude``; None if exhausted."""
    for s in rankings[origin]:
        if s not in exclude:
            return s
    return None


def next_min_detour(origin, k, exclude, rankings):
    """The next store ranked after (1-based) position ``k`` outside ``exclude``."""
    if k < 1:
        raise ValueError("detour rank starts at 1")
    for s in rankings[origin][k:]:
        if s not in exclude:
            return s
    return None


def seed_points(ctx: QueryContext, order):
    """Feasible cost vectors obtained by dropping stores from the min-cost route.

    Each step removes the store whose loss raises the cost least per unit of
    time saved, keeping the visiting order. Used only to prune, never emitted.
    """
    seq = list(order)
    points = []
    while seq:
        st = ctx.route_time(seq)
        sc, _ = ctx.route_cost(seq)
        points.append(CostVector(st, sc))
        best = None
        for k in range(len(seq)):
            rest = seq[:k] + seq[k + 1:]
            if not rest:
                continue
            c, _ = ctx.route_cost(rest)
            if c is None:
                continue
            saved = st - ctx.route_time(rest)
            key = ((c - sc) / saved if saved > 0 else INF, c, k)
            if best is None or key < best[0]:
                best = (key, rest)
        if best is None:
            break
        seq = best[1]
    return points


ENGINES = ("detour", "sets")


def solve_bsl(query, catalog, net, store_times=None, engine="detour", **options):
    """Exact linear skyline of ``query``.

    ``engine="detour"`` runs the ranked-detour enumeration in this module;
    ``engine="sets"`` runs the store-set branch and bound of
    :mod:`psdroute.exact`, which returns the same cost vectors and scales to
    larger instances.
    """
    ctx = QueryContext(query, catalog, net, store_times)
    return solve_exact(ctx, engine, **options)


def solve_exact(ctx: QueryContext, engine="detour", **options):
    if engine == "detour":
        return solve_bsl_ctx(ctx, **options)
    if engine == "sets":
        from .exact import solve_exact_ctx
        return solve_exact_ctx(ctx, **options)
    raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def solve_bsl_ctx(ctx: QueryContext, *, max_pops=5_000_000, exact_limit=8, st_bound=True,
                  cost_bound=True, dominance=True, skip_useless=True, trace=False,
                  seeds=None) -> BslResult:
    t0 = time.perf_counter()
    stats = BslStats()
    skyline = LinearSkyline()
    st_upper, sc_order = st_of_min_cost_route(ctx, exact_limit)
    sc_min = ctx.sc_min
    n, m = ctx.n, ctx.m
    qty = ctx.qty
    t, t_start, t_end, ids = ctx.t, ctx.t_start, ctx.t_end, ctx.ids
    rankings = build_detour_rankings(ctx)
    position = {o: {s: k for k, s in enumerate(r)} for o, r in rankings.items()}
    # listed products each store sells, as (product slot, cents)
    offers = [[(j, ctx.price[j][i]) for j in range(m) if ctx.price[j][i] is not None]
              for i in range(n)]
    no_prices = (INF,) * m

    def improves(prices, s):
        return any(c < prices[j] for j, c in offers[s])

    def add_store(prices, s):
        p = list(prices)
        for j, c in offers[s]:
            if c < p[j]:
                p[j] = c
        return tuple(p)

    known = list(seeds) if seeds is not None else seed_points(ctx, sc_order)
    known.append(CostVector(st_upper, sc_min))
    hull = []

    def refresh_hull():
        hull[:] = LinearSkyline.build([(cv, None) for cv in known + skyline.vectors]).vectors

    refresh_hull()

    # fastest way into each store from any other store or the shopper
    nn_in = [min([t_start[i]] + [t[u][i] for u in range(n) if u != i]) for i in range(n)]

    def family_bound(open_t, origin, child_st, prices, members):
        """Can no route ``prefix + (s', ...)`` of this family reach the skyline?

        The prefix ends at ``origin`` after ``open_t`` and holds ``members`` with
        best prices ``prices``; ``child_st`` bounds the family's time from below.
        The family is dropped when all of its cost vectors provably lie strictly
        above the lower hull of feasible points known so far, that is above the
        line through every hull edge its time range can meet.

        Two lower bounds on ``a * sc + b * st`` are tried per edge line:

        * adding store ``s`` takes at least ``open_t + t(origin, s) + t_end(s)``,
          so by time ``tau`` at most the stores within that detour help;
        * every added store is entered over at least its nearest-neighbour time;
          spreading that time over the products the store can improve turns the
          whole completion into a per-product minimum.
        """
        if child_st == INF or (st_bound and child_st > st_upper):
            return True
        if not cost_bound or not hull or child_st < hull[0].st:
            return False
        # staircase of (tau, cheapest reachable cost)
        cur = list(prices)
        missing = sum(1 for c in cur if c == INF)
        total = sum(c * q for c, q in zip(cur, qty) if c != INF)
        row = t_start if origin is SHOPPER else t[origin]
        stairs = []
        for s in rankings[origin]:
            if s in members:
                continue
            tau = open_t + row[s] + t_end[s]
            if tau < child_st:
                tau = child_st
            if tau > st_upper:
                break
            changed = False
            for j, c in offers[s]:
                old = cur[j]
                if c < old:
                    changed = True
                    if old == INF:
                        missing -= 1
                        total += c * qty[j]
                    else:
                        total += (c - old) * qty[j]
                    cur[j] = c
            if not missing and (changed or not stairs):
                if stairs and stairs[-1][0] == tau:
                    stairs[-1] = (tau, total)
                else:
                    stairs.append((tau, total))
        if not stairs:
            return True
        lo = 0
        while lo + 1 < len(hull) and hull[lo + 1].st <= child_st:
            lo += 1
        options = None
        for k in range(lo, len(hull) - 1):
            p, q = hull[k], hull[k + 1]
            ea, eb = q.st - p.st, p.sc - q.sc
            limit = ea * p.sc + eb * p.st
            if min(ea * c + eb * tau for tau, c in stairs) > limit:
                continue
            if options is None:
                options = completion_options(origin, prices, members)
            if options is False or ufl_bound(options, open_t, ea, eb, prices) <= limit:
                return False
        if len(hull) == 1 or stairs[0][0] >= hull[-1].st:
            # right of the hull only its cheapest point can still be matched
            if min(c for _, c in stairs) <= hull[-1].sc:
                return False
        return True

    def completion_options(origin, prices, members):
        # per product: [(cents * qty, entry time share)], plus the prefix price
        per = [[] for _ in range(m)]
        end = INF
        for s in range(n):
            if s in members:
                continue
            better = [j for j, c in offers[s] if c < prices[j]]
            if not better:
                continue
            enter = nn_in[s] if origin is SHOPPER or origin == s else min(nn_in[s], t[origin][s])
            share = enter / len(better)
            for j in better:
                per[j].append((ctx.price[j][s] * qty[j], share))
            if t_end[s] < end:
                end = t_end[s]
        for j in range(m):
            if prices[j] == INF and not per[j]:
                return False
        return per, end

    def ufl_bound(options, open_t, ea, eb, prices):
        per, end = options
        total = eb * (open_t + end)
        for j in range(m):
            best = ea * prices[j] * qty[j] if prices[j] != INF else INF
            for cents, share in per[j]:
                v = ea * cents + eb * share
                if v < best:
                    best = v
            total += best
        return total

    heap = []
    seen_states = set()

    def push(st, seq, open_t, prices, parent_open, parent_prices, ranks):
        heapq.heappush(heap, (st, len(seq), tuple(ids[i] for i in seq), seq, open_t, prices,
                              parent_open, parent_prices, ranks))
        stats.pushed += 1

    first = None
    for s in rankings[SHOPPER]:
        if not skip_useless or improves(no_prices, s):
            first = s
            break
    if first is not None:
        st0 = t_start[first] + t_end[first]
        if not family_bound(0, SHOPPER, st0, no_prices, ()):
            push(st0, (first,), t_start[first], add_store(no_prices, first), 0, no_prices,
                 (position[SHOPPER][first] + 1,))

    sc_upper = INF
    while heap:
        if stats.popped >= max_pops:
            stats.capped = True
            log.warning("BSL stopped after %d popped candidates; skyline may be sub-optimal",
                        stats.popped)
            break
        st, _, _, seq, open_t, prices, parent_open, parent_prices, ranks = heapq.heappop(heap)
        stats.popped += 1
        if trace:
            stats.pop_times.append(st)

        if INF not in prices:
            sc = sum(c * q for c, q in zip(prices, qty))
            if sc < sc_upper:
                route = ctx.make_route(seq, ranks)
                skyline.try_insert(CostVector(st, sc), route)
                sc_upper = sc
                refresh_hull()
            if sc_upper == sc_min:
                stats.terminated_early = True
                break

        last = seq[-1]
        members = set(seq)

        # successor: append the best detour from the last store
        extend = True
        if dominance:
            key = (frozenset(seq), last)
            if key in seen_states:
                extend = False
            else:
                seen_states.add(key)
        if extend:
            row = t[last]
            for k, s in enumerate(rankings[last]):
                if s in members or (skip_useless and not improves(prices, s)):
                    continue
                child_st = open_t + row[s] + t_end[s]
                if not family_bound(open_t, last, child_st, prices, members):
                    push(child_st, seq + (s,), open_t + row[s], add_store(prices, s),
                         open_t, prices, ranks + (k + 1,))
                break

        # sibling: next-ranked detour from the previous stop
        origin = seq[-2] if len(seq) > 1 else SHOPPER
        prefix = seq[:-1]
        prefix_set = members - {last}
        ranking = rankings[origin]
        for k in range(position[origin][last] + 1, len(ranking)):
            s = ranking[k]
            if s in prefix_set or (skip_useless and not improves(parent_prices, s)):
                continue
            leg = t_start[s] if origin is SHOPPER else t[origin][s]
            child_st = parent_open + leg + t_end[s]
            if not family_bound(parent_open, origin, child_st, parent_prices, prefix_set):
                push(child_st, prefix + (s,), parent_open + leg, add_store(parent_prices, s),
                     parent_open, parent_prices, ranks[:-1] + (k + 1,))
            break

    stats.evicted = skyline.evicted
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    return BslResult(skyline, stats, st_upper, sc_min, ctx)
