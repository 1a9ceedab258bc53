import random
import time
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from psdroute.bsl import (SHOPPER, build_detour_rankings, min_detour, next_min_detour,
                          solve_bsl, solve_bsl_ctx)
from psdroute.catalog import Catalog, InfeasibleListError, ShoppingList, Store
from psdroute.network import RoadNetwork, precompute_store_pair_times
from psdroute.oracle import brute_force_skylines
from psdroute.routes import PsdQuery, QueryContext, UnreachableError, st_of_min_cost_route
from psdroute.skyline import CostVector
from psdroute.toy import toy_catalog, toy_network, toy_query

from conftest import random_instance

TOY_LS = [CostVector(28000, 3300), CostVector(38000, 2300), CostVector(48000, 2100)]


def path_instance():
    # shopper 0 - s1 (1) - s2 (2) - delivery 3, unit edges
    net = RoadNetwork([(0, 1, 1000), (1, 2, 1000), (2, 3, 1000)])
    cat = Catalog([Store("s1", 1, {"x": 100}), Store("s2", 2, {"x": 90})])
    return QueryContext(PsdQuery(0, 3, ShoppingList.of("x")), cat, net)


def test_path_graph_ranking_tie_broken_by_id():
    ctx = path_instance()
    r = build_detour_rankings(ctx)
    assert [ctx.ids[s] for s in r[SHOPPER]] == ["s1", "s2"]
    assert ctx.t_start[0] + ctx.t_end[0] == ctx.t_start[1] + ctx.t_end[1] == 3000


def test_single_store_rankings_are_singletons():
    net = RoadNetwork([(0, 1, 1000), (1, 2, 1000)])
    cat = Catalog([Store("only", 1, {"x": 100})])
    ctx = QueryContext(PsdQuery(0, 2, ShoppingList.of("x")), cat, net)
    r = build_detour_rankings(ctx)
    assert r[SHOPPER] == [0]
    assert r[0] == []


def test_min_detour_and_next():
    rankings = {SHOPPER: [0, 1, 2]}
    assert min_detour(SHOPPER, set(), rankings) == 0
    assert min_detour(SHOPPER, {0}, rankings) == 1
    assert min_detour(SHOPPER, {0, 1, 2}, rankings) is None
    assert next_min_detour(SHOPPER, 1, set(), rankings) == 1
    assert next_min_detour(SHOPPER, 3, set(), rankings) is None
    assert next_min_detour(SHOPPER, 1, {1}, rankings) == 2
    with pytest.raises(ValueError):
        next_min_detour(SHOPPER, 0, set(), rankings)


def test_rankings_match_direct_sort():
    net, cat, q = random_instance(17, n_stores=8, list_size=3, n_products=3, n_vertices=14)
    ctx = QueryContext(q, cat, net)
    r = build_detour_rankings(ctx)
    for origin in [SHOPPER, *range(ctx.n)]:
        def detour(s):
            lead = ctx.t_start[s] if origin is SHOPPER else ctx.t[origin][s]
            return (lead + ctx.t_end[s], ctx.ids[s])
        expect = sorted((s for s in range(ctx.n) if s != origin), key=detour)
        assert r[origin] == expect
        for k in range(1, len(expect) + 1):
            assert next_min_detour(origin, k, set(), r) == (expect[k] if k < len(expect) else None)


def test_toy_skyline():
    t0 = time.perf_counter()
    res = solve_bsl(toy_query(), toy_catalog(), toy_network())
    assert res.skyline.vectors == TOY_LS
    assert [r.stores for r in res.routes] == [("s1", "s2"), ("s1", "s3"), ("s5", "s3")]
    assert time.perf_counter() - t0 < 1


def test_toy_literal_prices_keep_membership():
    res = solve_bsl(toy_query(), toy_catalog(d_at_s3=4), toy_network())
    assert [r.stores for r in res.routes] == [("s1", "s2"), ("s1", "s3"), ("s5", "s3")]


def test_single_store_selling_everything():
    net = RoadNetwork([(0, 1, 4000), (1, 2, 6000), (0, 2, 20000)])
    cat = Catalog([Store("all", 1, {"a": 100, "b": 200})])
    res = solve_bsl(PsdQuery(0, 2, ShoppingList.of("a", "b")), cat, net)
    assert res.skyline.vectors == [CostVector(10000, 300)]
    assert res.routes[0].stores == ("all",)


def test_infeasible_list():
    with pytest.raises(InfeasibleListError):
        solve_bsl(toy_query("ABZ"), toy_catalog(), toy_network())


def test_unreachable_delivery():
    net = RoadNetwork([(0, 1, 1000), (2, 3, 1000)])
    cat = Catalog([Store("a", 1, {"x": 100})])
    with pytest.raises(UnreachableError):
        solve_bsl(PsdQuery(0, 3, ShoppingList.of("x")), cat, net)


def test_st_upper_on_toy_is_r5():
    ctx = QueryContext(toy_query(), toy_catalog(), toy_network())
    st_u, order = st_of_min_cost_route(ctx)
    assert st_u == 48000
    assert tuple(ctx.ids[i] for i in order) == ("s5", "s3")


def test_st_upper_singleton():
    net = RoadNetwork([(0, 1, 1000), (1, 2, 2000)])
    ctx = QueryContext(PsdQuery(0, 2, ShoppingList.of("x")), Catalog([Store("a", 1, {"x": 1})]), net)
    assert st_of_min_cost_route(ctx)[0] == 3000


def test_st_upper_five_store_set_matches_permutations():
    for seed in range(20):
        net, cat, q = random_instance(seed, n_stores=7, list_size=5, n_products=5)
        ctx = QueryContext(q, cat, net)
        stores = ctx.min_cost_stores
        best = min(ctx.route_time(p) for p in permutations(stores))
        assert st_of_min_cost_route(ctx)[0] == best


def test_nearest_neighbour_beyond_exact_limit():
    net, cat, q = random_instance(5, n_stores=7, list_size=5, n_products=5)
    ctx = QueryContext(q, cat, net)
    exact = st_of_min_cost_route(ctx)[0]
    greedy, order = st_of_min_cost_route(ctx, exact_limit=0)
    assert greedy >= exact
    assert greedy == ctx.route_time(order)


@pytest.mark.parametrize("seed", range(40))
def test_matches_oracle(seed):
    net, cat, q = random_instance(seed, n_stores=random.Random(seed).randint(2, 6),
                                  list_size=random.Random(seed + 1).randint(1, 5))
    res = solve_bsl(q, cat, net, trace=True)
    oracle = brute_force_skylines(q, cat, net)
    assert res.skyline.vectors == oracle.linear
    assert res.stats.pop_times == sorted(res.stats.pop_times)


@pytest.mark.parametrize("flag", ["st_bound", "cost_bound", "dominance", "skip_useless"])
def test_each_pruning_alone_preserves_the_skyline(flag):
    options = dict(st_bound=False, cost_bound=False, dominance=False, skip_useless=False)
    options[flag] = True
    for seed in range(100, 115):
        net, cat, q = random_instance(seed, n_stores=5, list_size=3)
        ctx = QueryContext(q, cat, net)
        assert solve_bsl_ctx(ctx, **options).skyline.vectors == \
            brute_force_skylines(q, cat, net).linear


def test_early_stop_ends_at_min_cost():
    stopped = 0
    for seed in range(200, 240):
        net, cat, q = random_instance(seed, n_stores=6, list_size=4)
        res = solve_bsl(q, cat, net)
        if res.stats.terminated_early:
            stopped += 1
            assert res.skyline.vectors[-1].sc == res.sc_min
    assert stopped > 0


def test_first_accepted_route_is_fastest_feasible():
    for seed in range(300, 320):
        net, cat, q = random_instance(seed, n_stores=5, list_size=3)
        res = solve_bsl(q, cat, net)
        fastest = min(st for _, st, _ in brute_force_skylines(q, cat, net).routes)
        assert res.skyline.vectors[0].st == fastest


def test_pop_cap_flags_result(caplog):
    net, cat, q = random_instance(9, n_stores=6, list_size=4)
    res = solve_bsl(q, cat, net, max_pops=1, cost_bound=False)
    assert res.stats.capped
    assert "may be sub-optimal" in caplog.text


def test_routes_recompute_from_tables():
    net, cat, q = random_instance(44, n_stores=6, list_size=4)
    times = precompute_store_pair_times(net, [s.vertex for s in cat.stores.values()])
    res = solve_bsl(q, cat, net, times)
    ctx = res.context
    for r in res.routes:
        seq = [ctx.index_of[s] for s in r.stores]
        assert r.st == ctx.route_time(seq)
        assert r.sc == ctx.route_cost(seq)[0]


def test_sets_engine_agrees_on_toy():
    res = solve_bsl(toy_query(), toy_catalog(), toy_network(), engine="sets")
    assert res.skyline.vectors == TOY_LS


def test_unknown_engine():
    with pytest.raises(ValueError):
        solve_bsl(toy_query(), toy_catalog(), toy_network(), engine="magic")


@given(st.integers(0, 100_000))
def test_accepted_costs_strictly_fall(seed):
    net, cat, q = random_instance(seed, n_stores=4, list_size=3)
    v = solve_bsl(q, cat, net).skyline.vectors
    assert all(a.sc > b.sc and a.st < b.st for a, b in zip(v, v[1:]))
