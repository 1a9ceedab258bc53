"""Stores, shopping lists, price lookup tables and shopping cost.

Money is held as integer cents throughout.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN
from pathlib import Path


class CatalogError(ValueError):
    pass


class InfeasibleListError(ValueError):
    """Some listed products cannot be bought from the stores at hand."""

    def __init__(self, missing, context="catalog"):
        self.missing = tuple(sorted(missing))
        super().__init__(f"products not sold in {context}: {', '.join(map(str, self.missing))}")


def to_cents(value) -> int:
    try:
        d = Decimal(str(value))
    except InvalidOperation as exc:
        raise CatalogError(f"bad price {value!r}") from exc
    if not d.is_finite():
        raise CatalogError(f"bad price {value!r}")
    return int((d * 100).quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


def cents_to_str(cents) -> str:
    return str(Decimal(cents) / 100)


@dataclass(frozen=True)
class Store:
    store_id: str
    vertex: int
    prices: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        for p, c in self.prices.items():
            if not isinstance(c, int) or c <= 0:
                raise CatalogError(f"store {self.store_id}: price of {p} must be a positive "
                                   f"integer number of cents, got {c!r}")

    def sells(self, product):
        return product in self.prices


class ShoppingList:
    """Products with positive integer quantities; iteration order is insertion order."""

    def __init__(self, items):
        if isinstance(items, dict):
            items = items.items()
        pairs = []
        seen = set()
        for product, qty in items:
            if product in seen:
                raise CatalogError(f"product {product!r} listed twice")
            if not isinstance(qty, int) or isinstance(qty, bool) or qty < 1:
                raise CatalogError(f"quantity of {product!r} must be an integer >= 1, got {qty!r}")
            seen.add(product)
            pairs.append((product, qty))
        self.items = tuple(pairs)

    @classmethod
    def of(cls, *products, qty=1):
        return cls((p, qty) for p in products)

    @property
    def products(self):
        return tuple(p for p, _ in self.items)

    def qty(self, product):
        return dict(self.items)[product]

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __eq__(self, other):
        return isinstance(other, ShoppingList) and self.items == other.items

    def __repr__(self):
        return f"ShoppingList({dict(self.items)!r})"

    def to_json(self):
        return [{"product": p, "qty": q} for p, q in self.items]


def build_indexes(stores):
    """Return ``(product_index, price_table)``.

    product_index maps product -> [(store_id, cents), ...] ordered by ascending
    price, ties by store id. price_table maps (product, store_id) -> cents.
    """
    index: dict = {}
    table: dict = {}
    for s in stores:
        for product, cents in s.prices.items():
            index.setdefault(product, []).append((s.store_id, cents))
            table[(product, s.store_id)] = cents
    for entries in index.values():
        entries.sort(key=lambda e: (e[1], e[0]))
    return index, table


class Catalog:
    """All stores plus the two price lookup tables built over them."""

    def __init__(self, stores):
        stores = list(stores)
        ids = [s.store_id for s in stores]
        if len(set(ids)) != len(ids):
            raise CatalogError("duplicate store ids")
        self.stores = {s.store_id: s for s in sorted(stores, key=lambda s: s.store_id)}
        self.product_index, self.price_table = build_indexes(self.stores.values())

    def __len__(self):
        return len(self.stores)

    def __getitem__(self, store_id):
        return self.stores[store_id]

    def price(self, product, store_id):
        return self.price_table.get((product, store_id))

    def products(self):
        return self.product_index.keys()

    def subset(self, store_ids):
        return Catalog(self.stores[s] for s in store_ids)

    def check_network(self, net):
        for s in self.stores.values():
            if s.vertex not in net:
                raise CatalogError(f"store {s.store_id} sits on unknown vertex {s.vertex}")


def prune_stores(stores, shopping_list):
    """Stores that sell at least one listed product, in store-id order."""
    wanted = set(shopping_list.products)
    if isinstance(stores, Catalog):
        stores = stores.stores.values()
    kept = [s for s in stores if not wanted.isdisjoint(s.prices)]
    return sorted(kept, key=lambda s: s.store_id)


def min_cost_assignment(index, shopping_list):
    """Buy each product at its globally cheapest store (ties: lowest store id).

    Returns ``(store_ids, assignment, total_cents)`` where assignment maps
    product -> (store_id, unit cents).
    """
    assignment = {}
    missing = []
    for product, _ in shopping_list:
        entries = index.get(product)
        if not entries:
            missing.append(product)
            continue
        assignment[product] = entries[0]
    if missing:
        raise InfeasibleListError(missing)
    total = sum(assignment[p][1] * q for p, q in shopping_list)
    return frozenset(s for s, _ in assignment.values()), assignment, total


def satisfies_list(shopping_list, route, price_table) -> bool:
    return all(any((p, s) in price_table for s in route) for p, _ in shopping_list)


def shopping_cost(route, shopping_list, price_table):
    """Cost of the list when each product is bought at the cheapest store of ``route``.

    Equal prices go to the store visited first. Returns ``(total_cents, assignment)``.
    """
    assignment = {}
    total = 0
    missing = []
    for product, qty in shopping_list:
        best = None
        for s in route:
            c = price_table.get((product, s))
            if c is not None and (best is None or c < best[1]):
                best = (s, c)
        if best is None:
            missing.append(product)
            continue
        assignment[product] = best
        total += best[1] * qty
    if missing:
        raise InfeasibleListError(missing, context="route")
    return total, assignment


# ---------------------------------------------------------------------------
# File formats

CATALOG_HEADER = ["store_id", "vertex_id", "product_id", "price"]


def load_catalog(source) -> Catalog:
    """Read the ``store_id,vertex_id,product_id,price`` CSV (path or text)."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        name = str(source)
        text = Path(source).read_text()
    else:
        name, text = "<catalog>", source
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CatalogError(f"{name}: empty catalog file") from None
    if [h.strip() for h in header] != CATALOG_HEADER:
        raise CatalogError(f"{name}:1: expected header {','.join(CATALOG_HEADER)}")
    vertices: dict = {}
    prices: dict = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 4:
            raise CatalogError(f"{name}:{lineno}: expected 4 fields, got {len(row)}")
        sid, vtx, pid, price = (x.strip() for x in row)
        try:
            vtx = int(vtx)
        except ValueError:
            raise CatalogError(f"{name}:{lineno}: vertex id {vtx!r} is not an integer") from None
        if vertices.setdefault(sid, vtx) != vtx:
            raise CatalogError(f"{name}:{lineno}: store {sid} placed on two vertices")
        cents = to_cents(price)
        if cents <= 0:
            raise CatalogError(f"{name}:{lineno}: price must be positive, got {price}")
        if pid in prices.setdefault(sid, {}):
            raise CatalogError(f"{name}:{lineno}: duplicate price for ({sid}, {pid})")
        prices[sid][pid] = cents
    return Catalog(Store(sid, vertices[sid], prices[sid]) for sid in vertices)


def write_catalog(catalog: Catalog, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CATALOG_HEADER)
        for s in catalog.stores.values():
            for pid in sorted(s.prices):
                w.writerow([s.store_id, s.vertex, pid, cents_to_str(s.prices[pid])])


def shopping_list_from_json(doc) -> ShoppingList:
    if not isinstance(doc, list):
        raise CatalogError("shopping list must be a JSON array of {product, qty}")
    try:
        return ShoppingList((str(it["product"]), it.get("qty", 1)) for it in doc)
    except (KeyError, TypeError, AttributeError) as exc:
        raise CatalogError(f"bad shopping list entry: {exc}") from exc


def load_shopping_list(path) -> ShoppingList:
    return shopping_list_from_json(json.loads(Path(path).read_text()))
