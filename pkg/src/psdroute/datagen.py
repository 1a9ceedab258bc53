"""Seeded synthetic cities: grid road network, stores in rings, prices, queries."""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .catalog import Catalog, ShoppingList, Store, satisfies_list
from .network import RoadNetwork, multi_target_fastest_paths, seconds_to_ms
from .routes import PsdQuery

COST_DISTRIBUTIONS = ("Rising", "Normal", "Declining")
SIZE_DISTRIBUTIONS = ("Increasing", "Random", "Decreasing")
SIZES = ("small", "medium", "large")
ASSORTMENT = {"small": 0.25, "medium": 0.50, "large": 0.75}
PRICE_FLOOR = 0.50


class ConfigError(ValueError):
    pass


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    store_cardinality: int = 25
    cost_distribution: str = "Normal"
    size_distribution: str = "Random"
    list_size: int = 10
    leaf_capacity: int = 8
    query_count: int = 100
    seed: int = 0
    grid_size: int = 20
    product_count: int = 1000

    def __post_init__(self):
        for f in ("store_cardinality", "list_size", "leaf_capacity", "query_count",
                  "grid_size", "product_count"):
            v = getattr(self, f)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{f} must be a positive integer, got {v!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if self.cost_distribution not in COST_DISTRIBUTIONS:
            raise ConfigError(f"cost_distribution must be one of {COST_DISTRIBUTIONS}")
        if self.size_distribution not in SIZE_DISTRIBUTIONS:
            raise ConfigError(f"size_distribution must be one of {SIZE_DISTRIBUTIONS}")
        if self.list_size > self.product_count:
            raise ConfigError("list_size exceeds product_count")

    def to_json(self):
        return asdict(self)

    def replace(self, **changes):
        return ExperimentConfig(**{**asdict(self), **changes})


FIELD_NAMES = tuple(f.name for f in fields(ExperimentConfig))


def read_config_file(path) -> dict:
    """Raw settings from a JSON or TOML file (chosen by extension)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            doc = tomllib.loads(text)
        else:
            doc = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a table/object")
    return doc


def expand_sweep(settings: dict) -> list[ExperimentConfig]:
    """One config per combination of list-valued settings (in file order)."""
    settings = dict(settings)
    unknown = set(settings) - set(FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    axes = [(k, v) for k, v in settings.items() if isinstance(v, list)]
    for k, v in axes:
        if not v:
            raise ConfigError(f"sweep over {k} is empty")
    out = []
    for combo in itertools.product(*(v for _, v in axes)):
        cfg = dict(settings)
        cfg.update(zip((k for k, _ in axes), combo))
        try:
            out.append(ExperimentConfig(**cfg))
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
    return out


def sweep_axes(settings: dict) -> list[str]:
    return [k for k, v in settings.items() if isinstance(v, list)]


def _rng(seed, label):
    return random.Random(f"{seed}:{label}")


# ---------------------------------------------------------------------------
# network

def grid_network(n, seed=0, cell_m=200.0, speed_mps=10.0, jitter=0.25) -> RoadNetwork:
    """An n x n street grid with perturbed intersections and per-segment speeds.

    Vertex ``r * n + c`` sits near ``(c, r) * cell_m``. A segment's time is its
    length over ``speed_mps`` times a congestion factor drawn from U(0.8, 1.6).
    """
    if n < 2:
        raise ConfigError("grid needs at least 2 x 2 vertices")
    rng = _rng(seed, "grid")
    coords = {}
    for r in range(n):
        for c in range(n):
            dx, dy = rng.uniform(-jitter, jitter), rng.uniform(-jitter, jitter)
            coords[r * n + c] = (round((c + dx) * cell_m, 1), round((r + dy) * cell_m, 1))
    edges = []
    for r in range(n):
        for c in range(n):
            v = r * n + c
            for u in ((v + 1) if c + 1 < n else None, (v + n) if r + 1 < n else None):
                if u is None:
                    continue
                (x0, y0), (x1, y1) = coords[v], coords[u]
                seconds = math.hypot(x1 - x0, y1 - y0) / speed_mps * rng.uniform(0.8, 1.6)
                edges.append((v, u, seconds_to_ms(f"{seconds:.3f}")))
    return RoadNetwork(edges, coords)


# ---------------------------------------------------------------------------
# city

@dataclass
class CityModel:
    network: RoadNetwork
    center: int
    stores: list          # store ids, in placement order
    vertex: dict          # store id -> vertex
    size: dict            # store id -> small / medium / large
    ring: dict            # store id -> 0 (inner), 1, 2 (outer)
    distance: dict        # store id -> ms from the center vertex
    assortment: dict      # store id -> sorted product ids
    products: list        # the product universe

    def ring_members(self, k):
        return [s for s in self.stores if self.ring[s] == k]


def product_ids(count):
    width = len(str(count - 1))
    return [f"p{i:0{width}d}" for i in range(count)]


def center_vertex(net: RoadNetwork):
    pts = [(v, net.coords[v]) for v in net.vertices]
    cx = sum(p[0] for _, p in pts) / len(pts)
    cy = sum(p[1] for _, p in pts) / len(pts)
    return min(pts, key=lambda vp: ((vp[1][0] - cx) ** 2 + (vp[1][1] - cy) ** 2, vp[0]))[0]


def gen_city(config: ExperimentConfig, network: RoadNetwork) -> CityModel:
    n = config.store_cardinality
    vertices = sorted(network.vertices)
    if n > len(vertices):
        raise ConfigError(f"{n} stores do not fit on {len(vertices)} vertices")
    if not network.coords or any(v not in network.coords for v in vertices):
        raise ConfigError("city generation needs coordinates for every vertex")
    rng = _rng(config.seed, "city")
    width = len(str(n))
    ids = [f"s{i:0{width}d}" for i in range(1, n + 1)]
    vertex = dict(zip(ids, rng.sample(vertices, n)))
    center = center_vertex(network)
    dist_v = multi_target_fastest_paths(network, center, set(vertex.values()))
    distance = {s: dist_v[vertex[s]] for s in ids}
    per_ring = math.ceil(n / 3)
    ranked = sorted(ids, key=lambda s: (distance[s], s))
    ring = {s: min(k // per_ring, 2) for k, s in enumerate(ranked)}
    if config.size_distribution == "Increasing":
        size = {s: SIZES[ring[s]] for s in ids}
    elif config.size_distribution == "Decreasing":
        size = {s: SIZES[2 - ring[s]] for s in ids}
    else:
        size = {s: rng.choice(SIZES) for s in ids}
    products = product_ids(config.product_count)
    assortment = {}
    for s in ids:
        k = max(1, round(ASSORTMENT[size[s]] * len(products)))
        assortment[s] = sorted(rng.sample(products, k))
    return CityModel(network, center, ids, vertex, size, ring, distance, assortment, products)


def assign_prices(city: CityModel, cost_distribution: str, seed) -> Catalog:
    if cost_distribution not in COST_DISTRIBUTIONS:
        raise ConfigError(f"cost_distribution must be one of {COST_DISTRIBUTIONS}")
    # Rising and Declining share draws, so one mirrors the other for a given seed
    rng = _rng(seed, "prices:normal" if cost_distribution == "Normal" else "prices:linear")
    sellers = {p: [] for p in city.products}
    for s in city.stores:
        for p in city.assortment[s]:
            sellers[p].append(s)
    prices = {s: {} for s in city.stores}
    for p in city.products:
        if cost_distribution == "Normal":
            mean = rng.uniform(5, 15)
            for s in sellers[p]:
                prices[s][p] = max(PRICE_FLOOR, rng.gauss(mean, 2))
            continue
        lo, hi = sorted((rng.uniform(5, 15), rng.uniform(5, 15)))
        if not sellers[p]:
            continue
        near = min(city.distance[s] for s in sellers[p])
        far = max(city.distance[s] for s in sellers[p])
        for s in sellers[p]:
            frac = (city.distance[s] - near) / (far - near) if far > near else 0.0
            if cost_distribution == "Declining":
                frac = 1.0 - frac if far > near else 0.0
            prices[s][p] = lo + (hi - lo) * frac
    return Catalog(Store(s, city.vertex[s], {p: max(1, round(c * 100)) for p, c in ps.items()})
                   for s, ps in prices.items())


def gen_queries(city: CityModel, catalog: Catalog, config: ExperimentConfig,
                max_attempts=1000) -> list[PsdQuery]:
    rng = _rng(config.seed, "queries")
    vertices = sorted(city.network.vertices)
    if len(vertices) < 2:
        raise GenerationError("need two distinct vertices for a query")
    out = []
    for _ in range(config.query_count):
        shopper, delivery = rng.sample(vertices, 2)
        for _ in range(max_attempts):
            lst = ShoppingList.of(*rng.sample(city.products, config.list_size))
            if satisfies_list(lst, list(catalog.stores), catalog.price_table):
                break
        else:
            raise GenerationError(f"no feasible list of size {config.list_size} "
                                  f"after {max_attempts} draws")
        out.append(PsdQuery(shopper, delivery, lst))
    return out


@dataclass
class Experiment:
    config: ExperimentConfig
    network: RoadNetwork
    city: CityModel
    catalog: Catalog
    queries: list


def generate(config: ExperimentConfig, network: RoadNetwork = None) -> Experiment:
    """Everything one configuration needs, from a seed."""
    if network is None:
        network = grid_network(config.grid_size, config.seed)
    city = gen_city(config, network)
    catalog = assign_prices(city, config.cost_distribution, config.seed)
    return Experiment(config, network, city, catalog, gen_queries(city, catalog, config))
