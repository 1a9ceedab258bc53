import math
import random

import pytest
from hypothesis import HealthCheck, settings

from psdroute.catalog import Catalog, ShoppingList, Store
from psdroute.network import RoadNetwork
from psdroute.routes import PsdQuery

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line for the end-of-run acceptance summary."""
    def emit(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return emit


def random_network(rng, n_vertices, extra_edges=None, connected=True):
    """Random geometric-ish graph; weights in whole seconds (stored as ms)."""
    coords = {v: (round(rng.uniform(0, 100), 1), round(rng.uniform(0, 100), 1))
              for v in range(n_vertices)}
    edges = []
    start = 1 if connected else max(2, n_vertices // 2)
    for v in range(start, n_vertices):
        u = rng.randrange(v)
        edges.append((u, v, rng.randint(1, 30) * 1000))
    for _ in range(extra_edges if extra_edges is not None else n_vertices):
        u, v = rng.sample(range(n_vertices), 2)
        edges.append((u, v, rng.randint(1, 30) * 1000))
    return RoadNetwork(edges, coords)


def random_instance(seed, n_stores=5, list_size=3, n_products=None, n_vertices=None):
    """A small random PSD instance; every listed product is sold somewhere."""
    rng = random.Random(seed)
    n_products = n_products or list_size + 2
    n_vertices = n_vertices or n_stores + 4
    net = random_network(rng, n_vertices)
    products = [f"p{k}" for k in range(n_products)]
    stores = []
    for k in range(n_stores):
        vertex = rng.randrange(n_vertices)
        size = rng.randint(1, max(1, math.ceil(n_products * 0.7)))
        prices = {p: rng.randint(1, 12) * 50 for p in rng.sample(products, size)}
        stores.append(Store(f"s{k + 1}", vertex, prices))
    sold = sorted({p for s in stores for p in s.prices})
    listed = rng.sample(sold, min(list_size, len(sold)))
    qty = {p: rng.choice((1, 1, 1, 2)) for p in listed}
    lst = ShoppingList((p, qty[p]) for p in listed)
    shopper, delivery = rng.sample(range(n_vertices), 2)
    return net, Catalog(stores), PsdQuery(shopper, delivery, lst)
