import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from psdroute.catalog import Catalog, ShoppingList, Store
from psdroute.network import RoadNetwork
from psdroute.oracle import OracleLimitError, brute_force_skylines, count_sequences, grid_area
from psdroute.routes import PsdQuery
from psdroute.skyline import CostVector
from psdroute.toy import toy_catalog, toy_network, toy_query

from conftest import random_instance

TOY_ROUTES = {("s1", "s2"): (28000, 3300), ("s1", "s3"): (38000, 2300), ("s1", "s4"): (41000, 3000),
          ("s5", "s2"): (47000, 3100), ("s5", "s3"): (48000, 2100), ("s5", "s4"): (36000, 2800)}


def test_toy_enumeration_contains_the_two_store_routes():
    res = brute_force_skylines(toy_query(), toy_catalog(), toy_network())
    found = {stores: (st, sc) for stores, st, sc in res.routes}
    for route, cv in TOY_ROUTES.items():
        assert found[route] == cv


def test_toy_skylines():
    res = brute_force_skylines(toy_query(), toy_catalog(), toy_network())
    assert res.conventional == [CostVector(28000, 3300), CostVector(36000, 2800),
                                CostVector(38000, 2300), CostVector(48000, 2100)]
    assert res.linear == [CostVector(28000, 3300), CostVector(38000, 2300),
                          CostVector(48000, 2100)]
    assert res.route_for(CostVector(36000, 2800)) == ("s5", "s4")


def test_single_feasible_store():
    net = RoadNetwork([(0, 1, 1000), (1, 2, 2000)])
    cat = Catalog([Store("a", 1, {"x": 100})])
    res = brute_force_skylines(PsdQuery(0, 2, ShoppingList.of("x")), cat, net)
    assert [r[0] for r in res.routes] == [("a",)]
    assert res.conventional == res.linear == [CostVector(3000, 100)]


def test_refuses_large_instances():
    net, cat, q = random_instance(1, n_stores=9, list_size=3, n_products=3)
    cat = Catalog(Store(s.store_id, s.vertex, {"p0": 100, "p1": 100, "p2": 100})
                  for s in cat.stores.values())
    with pytest.raises(OracleLimitError):
        brute_force_skylines(q, cat, net, max_stores=7)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_enumeration_count_on_fully_stocked_instances(n):
    net = RoadNetwork([(v, v + 1, 1000) for v in range(n + 1)])
    cat = Catalog(Store(f"s{k}", k + 1, {"x": 100 + k}) for k in range(n))
    res = brute_force_skylines(PsdQuery(0, n + 1, ShoppingList.of("x")), cat, net)
    assert len(res.routes) == count_sequences(n)
    assert count_sequences(n) == sum(math.perm(n, k) for k in range(1, n + 1))


def test_count_for_seven_stores():
    assert count_sequences(7) == 13699


@given(st.integers(0, 5000))
def test_linear_is_subset_of_conventional(seed):
    net, cat, q = random_instance(seed, n_stores=4, list_size=2)
    res = brute_force_skylines(q, cat, net)
    assert set(res.linear) <= set(res.conventional)


def test_grid_area_singleton():
    assert grid_area([CostVector(2, 3)], resolution=1000) == pytest.approx(6.0, abs=0.01)


def test_grid_area_point_at_origin():
    assert grid_area([CostVector(0, 0)], resolution=100) == 0


def test_grid_area_rejects_coarse_grid():
    with pytest.raises(ValueError):
        grid_area([CostVector(1, 1)], resolution=50)


def test_grid_area_converges_on_a_staircase():
    pts = [CostVector(1, 4), CostVector(3, 2), CostVector(4, 1)]
    exact = Fraction(1 * 4 + 2 * 4 + 1 * 2)
    assert grid_area(pts, resolution=2000) == pytest.approx(float(exact), rel=2e-3)
