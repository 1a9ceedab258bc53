"""A five-store toy instance used in docs, tests and the CLI smoke run.

Shopper at vertex 0, customer at vertex 1, stores s1..s5 at vertices 2..6.
Travel times (seconds) are chosen so the six two-store routes buying
A, B, C, D take 28, 38, 41, 47, 48 and 36 seconds.

The route costs 33, 23, 30, 31, 21 and 28 only add up when s3 sells D for 3;
with a price of 4 the two routes through s3 come out one dollar dearer.
``toy_catalog(d_at_s3=4)`` gives that variant.
"""
from .catalog import Catalog, ShoppingList, Store, to_cents
from .network import RoadNetwork, seconds_to_ms
from .routes import PsdQuery

SHOPPER, CUSTOMER = 0, 1
STORE_VERTEX = {"s1": 2, "s2": 3, "s3": 4, "s4": 5, "s5": 6}

_EDGES = [
    ("ls", "s1", 10), ("s1", "s2", 10), ("s2", "lc", 8),
    ("s1", "s3", 18), ("s3", "lc", 10),
    ("s1", "s4", 24), ("s4", "lc", 7),
    ("ls", "s5", 10), ("s5", "s2", 29), ("s5", "s3", 28), ("s5", "s4", 19),
]

_COORDS = {"ls": (0.0, 5.0), "lc": (40.0, 5.0), "s1": (10.0, 9.0), "s2": (22.0, 10.0),
           "s3": (28.0, 6.0), "s4": (33.0, 1.0), "s5": (12.0, 0.0)}

PRICES = {
    "s1": {"A": 7, "B": 8, "F": 10},
    "s2": {"C": 10, "D": 8, "E": 10},
    "s3": {"C": 5, "D": 3, "F": 6},
    "s4": {"C": 8, "D": 7, "F": 12},
    "s5": {"A": 6, "B": 7, "E": 8},
}


def _vid(name):
    return {"ls": SHOPPER, "lc": CUSTOMER, **STORE_VERTEX}[name]


def toy_network() -> RoadNetwork:
    edges = [(_vid(a), _vid(b), seconds_to_ms(w)) for a, b, w in _EDGES]
    return RoadNetwork(edges, {_vid(k): v for k, v in _COORDS.items()})


def toy_catalog(d_at_s3=3) -> Catalog:
    prices = {sid: dict(p) for sid, p in PRICES.items()}
    prices["s3"]["D"] = d_at_s3
    return Catalog(Store(sid, STORE_VERTEX[sid], {p: to_cents(c) for p, c in ps.items()})
                   for sid, ps in prices.items())


def toy_query(products="ABCD") -> PsdQuery:
    return PsdQuery(SHOPPER, CUSTOMER, ShoppingList.of(*products))
