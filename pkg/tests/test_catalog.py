import random
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from psdroute.catalog import (Catalog, CatalogError, InfeasibleListError, ShoppingList, Store,
                              build_indexes, load_catalog, min_cost_assignment, prune_stores,
                              satisfies_list, shopping_cost, to_cents, write_catalog)
from psdroute.toy import toy_catalog

TOY = toy_catalog()
ABCD = ShoppingList.of(*"ABCD")


def ids(stores):
    return [s.store_id for s in stores]


def test_product_index_for_c():
    assert TOY.product_index["C"] == [("s3", 500), ("s4", 800), ("s2", 1000)]


def test_empty_store_set_gives_empty_tables():
    assert build_indexes([]) == ({}, {})


def test_price_table_agrees_with_assortments():
    rng = random.Random(4)
    products = [f"p{k}" for k in range(30)]
    stores = [Store(f"s{k:02d}", k, {p: rng.randint(1, 999) for p in rng.sample(products, 12)})
              for k in range(20)]
    index, table = build_indexes(stores)
    for s in stores:
        for p in products:
            assert table.get((p, s.store_id)) == s.prices.get(p)
    for p, entries in index.items():
        assert entries == sorted(entries, key=lambda e: (e[1], e[0]))
        assert {sid for sid, _ in entries} == {s.store_id for s in stores if p in s.prices}


def test_prune_keeps_all_toy_stores_for_abcd():
    assert ids(prune_stores(TOY, ABCD)) == ["s1", "s2", "s3", "s4", "s5"]


def test_prune_for_f():
    assert ids(prune_stores(TOY, ShoppingList.of("F"))) == ["s1", "s3", "s4"]


def test_prune_unknown_product_is_empty():
    assert prune_stores(TOY, ShoppingList.of("Z")) == []


def test_min_cost_assignment_abcd():
    stores, assignment, total = min_cost_assignment(TOY.product_index, ABCD)
    assert stores == {"s5", "s3"}
    assert total == 2100
    assert assignment["C"] == ("s3", 500)


def test_min_cost_with_quantity():
    stores, _, total = min_cost_assignment(TOY.product_index, ShoppingList({"A": 2}))
    assert stores == {"s5"} and total == 1200


def test_min_cost_single_store():
    cat = Catalog([Store("only", 0, {"x": 250})])
    assert min_cost_assignment(cat.product_index, ShoppingList({"x": 3}))[1:] == (
        {"x": ("only", 250)}, 750)


def test_min_cost_ties_go_to_lowest_store_id():
    cat = Catalog([Store("b", 0, {"x": 100}), Store("a", 1, {"x": 100})])
    assert min_cost_assignment(cat.product_index, ShoppingList.of("x"))[1]["x"] == ("a", 100)


def test_min_cost_infeasible():
    with pytest.raises(InfeasibleListError) as exc:
        min_cost_assignment(TOY.product_index, ShoppingList.of("A", "Z", "Y"))
    assert exc.value.missing == ("Y", "Z")


@pytest.mark.parametrize("route, cents", [(("s1", "s2"), 3300), (("s1", "s3"), 2300),
                                          (("s5", "s4"), 2800)])
def test_route_costs(route, cents):
    assert shopping_cost(route, ABCD, TOY.price_table)[0] == cents


def test_route_cost_ties_go_to_earliest_store():
    cat = Catalog([Store("a", 0, {"x": 100}), Store("b", 1, {"x": 100})])
    assert shopping_cost(("b", "a"), ShoppingList.of("x"), cat.price_table)[1]["x"] == ("b", 100)


def test_route_cost_infeasible_names_missing():
    with pytest.raises(InfeasibleListError) as exc:
        shopping_cost(("s1",), ABCD, TOY.price_table)
    assert exc.value.missing == ("C", "D")


def test_satisfies_list():
    assert satisfies_list(ABCD, ("s1", "s2"), TOY.price_table)
    assert not satisfies_list(ABCD, ("s1",), TOY.price_table)
    assert satisfies_list(ShoppingList([]), ("s1",), TOY.price_table)


def test_literal_price_variant_costs_a_dollar_more_through_s3():
    literal = toy_catalog(d_at_s3=4)
    assert shopping_cost(("s1", "s3"), ABCD, literal.price_table)[0] == 2400
    assert min_cost_assignment(literal.product_index, ABCD)[2] == 2200


@pytest.mark.parametrize("text, cents", [("7", 700), ("7.5", 750), ("0.01", 1),
                                         ("12.345", 1234), ("12.355", 1236)])
def test_to_cents_rounds_half_even(text, cents):
    assert to_cents(text) == cents


@pytest.mark.parametrize("text", ["seven", "nan", "inf"])
def test_to_cents_rejects_non_numbers(text):
    with pytest.raises(CatalogError):
        to_cents(text)


@pytest.mark.parametrize("items", [[("a", 0)], [("a", 1), ("a", 2)], [("a", 1.5)]])
def test_bad_shopping_lists(items):
    with pytest.raises(CatalogError):
        ShoppingList(items)


def test_catalog_csv_round_trip(tmp_path):
    path = tmp_path / "cat.csv"
    write_catalog(TOY, path)
    back = load_catalog(path)
    assert back.price_table == TOY.price_table
    assert {s.store_id: s.vertex for s in back.stores.values()} == \
        {s.store_id: s.vertex for s in TOY.stores.values()}


@pytest.mark.parametrize("body, line", [
    ("s1,2,A,7\ns1,2,A,8\n", 3),
    ("s1,2,A,7\ns1,3,B,8\n", 3),
    ("s1,2,A,0\n", 2),
    ("s1,x,A,7\n", 2),
    ("s1,2,A\n", 2),
])
def test_catalog_errors_carry_line_numbers(body, line):
    with pytest.raises(CatalogError) as exc:
        load_catalog("store_id,vertex_id,product_id,price\n" + body)
    assert f":{line}:" in str(exc.value)


def test_catalog_header_checked():
    with pytest.raises(CatalogError):
        load_catalog("store,vertex,product,price\ns1,2,A,7\n")


@st.composite
def catalog_and_list(draw):
    n = draw(st.integers(1, 6))
    products = [f"p{k}" for k in range(draw(st.integers(1, 5)))]
    stores = []
    for k in range(n):
        sold = draw(st.lists(st.sampled_from(products), unique=True, min_size=1))
        stores.append(Store(f"s{k}", k, {p: draw(st.integers(1, 50)) for p in sold}))
    cat = Catalog(stores)
    sold = sorted({p for s in stores for p in s.prices})
    listed = draw(st.lists(st.sampled_from(sold), unique=True, min_size=1))
    lst = ShoppingList((p, draw(st.integers(1, 3))) for p in listed)
    return cat, lst


@given(catalog_and_list(), st.randoms(use_true_random=False))
def test_cost_is_a_running_minimum(data, rnd):
    cat, lst = data
    order = list(cat.stores)
    rnd.shuffle(order)
    prev = None
    for k in range(1, len(order) + 1):
        route = order[:k]
        if not satisfies_list(lst, route, cat.price_table):
            continue
        cost = shopping_cost(route, lst, cat.price_table)[0]
        if prev is not None:
            assert cost <= prev
        prev = cost


@given(catalog_and_list())
def test_min_cost_bounds_every_route_and_order_does_not_matter(data):
    cat, lst = data
    floor = min_cost_assignment(cat.product_index, lst)[2]
    stores = list(cat.stores)[:4]
    for k in range(1, len(stores) + 1):
        for route in permutations(stores, k):
            if not satisfies_list(lst, route, cat.price_table):
                continue
            cost = shopping_cost(route, lst, cat.price_table)[0]
            assert cost >= floor
            assert cost == shopping_cost(tuple(sorted(route)), lst, cat.price_table)[0]
