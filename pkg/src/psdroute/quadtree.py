"""PR quad-tree over store locations with per-quadrant product statistics."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .network import INF

SW, SE, NW, NE = range(4)
MAX_DEPTH = 40


@dataclass
class QuadNode:
    node_id: int
    bounds: tuple                  # (x0, y0, x1, y1)
    depth: int
    stores: list                   # every store id in the subtree, sorted
    children: list = None          # four QuadNodes (SW, SE, NW, NE) or None for a leaf
    overflow: bool = False         # leaf kept above capacity (coincident points)
    price_sum: dict = field(default_factory=dict)   # product -> total cents
    price_count: dict = field(default_factory=dict)  # product -> number of stores

    @property
    def is_leaf(self):
        return self.children is None

    def average_price(self, product):
        n = self.price_count.get(product)
        return self.price_sum[product] / n if n else None

    def offers(self, product):
        return product in self.price_count


class StoreQuadTree:
    def __init__(self, root, capacity, positions):
        self.root = root
        self.capacity = capacity
        self.positions = positions     # store id -> (x, y)
        self.nodes = []
        self._index(root)
        self.leaf_of = {s: leaf for leaf in self.leaves() for s in leaf.stores}
        self.partition_times = None    # node id -> node id -> ms, see precompute_partition_times

    def _index(self, node):
        self.nodes.append(node)
        for c in node.children or ():
            self._index(c)

    def leaves(self):
        return [n for n in self.nodes if n.is_leaf]

    def node(self, node_id):
        return self.nodes[node_id]

    def descendant_leaves(self, node):
        if node.is_leaf:
            return [node]
        return [leaf for c in node.children for leaf in self.descendant_leaves(c)]

    def partition_time(self, a, b):
        return self.partition_times[a.node_id][b.node_id]


def _quadrant(x, y, mx, my):
    # points on a split line go west / south
    return (0 if x <= mx else 1) + (0 if y <= my else 2)


def build_quadtree(stores, coords, capacity=8) -> StoreQuadTree:
    """Split the stores' MBR at mid-points until no quadrant holds more than
    ``capacity`` stores. ``coords`` maps a store's vertex to ``(x, y)``."""
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    stores = sorted(stores, key=lambda s: s.store_id)
    pos = {}
    for s in stores:
        if s.vertex not in coords:
            raise ValueError(f"no coordinates for store {s.store_id} (vertex {s.vertex})")
        pos[s.store_id] = tuple(map(float, coords[s.vertex]))
    by_id = {s.store_id: s for s in stores}
    if pos:
        xs = [p[0] for p in pos.values()]
        ys = [p[1] for p in pos.values()]
        bounds = (min(xs), min(ys), max(xs), max(ys))
    else:
        bounds = (0.0, 0.0, 0.0, 0.0)
    counter = iter(range(1 << 30))

    def make(ids, bounds, depth):
        node = QuadNode(next(counter), bounds, depth, sorted(ids))
        for sid in node.stores:
            for product, cents in by_id[sid].prices.items():
                node.price_sum[product] = node.price_sum.get(product, 0) + cents
                node.price_count[product] = node.price_count.get(product, 0) + 1
        if len(ids) <= capacity:
            return node
        if len({pos[s] for s in ids}) == 1 or depth >= MAX_DEPTH:
            node.overflow = True
            return node
        x0, y0, x1, y1 = bounds
        mx, my = (x0 + x1) / 2, (y0 + y1) / 2
        parts = [[], [], [], []]
        for sid in node.stores:
            parts[_quadrant(*pos[sid], mx, my)].append(sid)
        boxes = [(x0, y0, mx, my), (mx, y0, x1, my), (x0, my, mx, y1), (mx, my, x1, y1)]
        node.children = [make(parts[q], boxes[q], depth + 1) for q in range(4)]
        return node

    return StoreQuadTree(make(list(pos), bounds, 0), capacity, pos)


def precompute_partition_times(tree: StoreQuadTree, catalog, store_times):
    """Minimum store-to-store time between every pair of quadrants.

    Computed leaf to leaf, then any quadrant takes the minimum over its
    descendant leaves. Empty quadrants are INF from everything.
    """
    leaves = tree.leaves()
    vertex = {sid: catalog[sid].vertex for sid in tree.positions}
    leaf_t = {}
    for a in leaves:
        for b in leaves:
            if b.node_id < a.node_id:
                leaf_t[(a.node_id, b.node_id)] = leaf_t[(b.node_id, a.node_id)]
                continue
            best = INF
            for s in a.stores:
                for u in b.stores:
                    t = store_times(vertex[s], vertex[u])
                    if t < best:
                        best = t
            leaf_t[(a.node_id, b.node_id)] = best
    under = {n.node_id: [l.node_id for l in tree.descendant_leaves(n)] for n in tree.nodes}
    table = {}
    for a in tree.nodes:
        row = table[a.node_id] = {}
        for b in tree.nodes:
            row[b.node_id] = min((leaf_t[(la, lb)] for la in under[a.node_id]
                                  for lb in under[b.node_id]), default=INF)
    tree.partition_times = table
    return table


# ---------------------------------------------------------------------------
# Cache sidecar: {"format": "psdroute-quadtree", "version": 1, "key": ..., "capacity": c,
#                 "positions": {store: [x, y]}, "partition_times": [[a, b, ms | null], ...]}
# The tree itself is rebuilt deterministically from positions and capacity.

TREE_FORMAT = "psdroute-quadtree"
TREE_VERSION = 1


def tree_cache_key(catalog, coords, capacity):
    h = hashlib.sha256(f"capacity={capacity}\n".encode())
    for sid, s in catalog.stores.items():
        h.update(f"{sid} {s.vertex} {coords.get(s.vertex)}\n".encode())
    return h.hexdigest()


def save_tree(tree: StoreQuadTree, path, key):
    times = [[a, b, None if t == INF else t]
             for a, row in sorted(tree.partition_times.items())
             for b, t in sorted(row.items()) if a <= b]
    doc = {"format": TREE_FORMAT, "version": TREE_VERSION, "key": key,
           "capacity": tree.capacity,
           "positions": {s: list(p) for s, p in sorted(tree.positions.items())},
           "partition_times": times}
    Path(path).write_text(json.dumps(doc, separators=(",", ":")))


def load_tree(path, catalog, coords, key=None) -> StoreQuadTree:
    from .network import CacheError
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheError(f"unreadable tree cache {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != TREE_FORMAT:
        raise CacheError(f"{path}: not a quad-tree cache")
    if doc.get("version") != TREE_VERSION:
        raise CacheError(f"{path}: unsupported version {doc.get('version')!r}")
    if key is not None and doc.get("key") != key:
        raise CacheError(f"{path}: cache key mismatch")
    try:
        tree = build_quadtree(catalog.stores.values(), coords, doc["capacity"])
        table = {n.node_id: {} for n in tree.nodes}
        for a, b, t in doc["partition_times"]:
            t = INF if t is None else t
            table[a][b] = t
            table[b][a] = t
        if any(len(row) != len(tree.nodes) for row in table.values()):
            raise ValueError("incomplete partition-time table")
    except (KeyError, TypeError, ValueError) as exc:
        raise CacheError(f"{path}: corrupt tree cache ({exc})") from exc
    tree.partition_times = table
    return tree
