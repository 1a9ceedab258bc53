"""Road network loading and fastest-path travel times.

Edge weights are travel times. They are read as decimal seconds and kept
internally as integer milliseconds so that every sum of travel times is
exact and every downstream dominance test can use integer arithmetic.
"""
from __future__ import annotations

import hashlib
import json
import math
from decimal import Decimal, InvalidOperation, ROUND_HALF_EVEN
from heapq import heappop, heappush
from pathlib import Path

INF = math.inf
MS_PER_SECOND = 1000


class NetworkError(ValueError):
    """Malformed or invalid network input."""


class ParseError(NetworkError):
    def __init__(self, message, line=None, source=None):
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line
        self.source = source


class ValidationError(NetworkError):
    pass


def seconds_to_ms(value) -> int:
    """Convert a decimal number of seconds (str, int, float or Decimal) to ms."""
    try:
        d = Decimal(str(value))
    except InvalidOperation as exc:
        raise ValueError(f"not a number: {value!r}") from exc
    if not d.is_finite():
        raise ValueError(f"not a finite number: {value!r}")
    return int((d * MS_PER_SECOND).quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


def ms_to_seconds(ms) -> float:
    if ms == INF:
        return INF
    return ms / MS_PER_SECOND


class RoadNetwork:
    """Undirected graph with strictly positive integer (ms) edge weights.

    Treat instances as immutable once built; searches never mutate them.
    """

    def __init__(self, edges=(), coords=None, vertices=()):
        self._adj: dict[int, dict[int, int]] = {}
        self.coords: dict[int, tuple[float, float]] = dict(coords or {})
        for v in vertices:
            self._adj.setdefault(v, {})
        for v in self.coords:
            self._adj.setdefault(v, {})
        for u, v, w in edges:
            self._add_edge(u, v, w)

    def _add_edge(self, u, v, w):
        if u == v:
            raise ValidationError(f"self-loop on vertex {u}")
        if not isinstance(w, int) or w <= 0:
            raise ValidationError(f"edge ({u}, {v}) has non-positive weight {w!r}")
        nu = self._adj.setdefault(u, {})
        nv = self._adj.setdefault(v, {})
        old = nu.get(v)
        if old is None or w < old:
            nu[v] = w
            nv[u] = w

    @property
    def vertices(self):
        return self._adj.keys()

    def __contains__(self, v):
        return v in self._adj

    def __len__(self):
        return len(self._adj)

    def neighbors(self, v):
        return self._adj[v]

    def edges(self):
        """Yield each undirected edge once as ``(u, v, weight_ms)`` with u < v."""
        for u, nbrs in self._adj.items():
            for v, w in nbrs.items():
                if u < v:
                    yield u, v, w

    @property
    def n_edges(self):
        return sum(len(n) for n in self._adj.values()) // 2

    def weight(self, u, v):
        return self._adj[u][v]

    def check_vertex(self, v):
        if v not in self._adj:
            raise KeyError(f"unknown vertex {v!r}")

    def content_hash(self):
        h = hashlib.sha256()
        for u, v, w in sorted(self.edges()):
            h.update(f"{u} {v} {w}\n".encode())
        return h.hexdigest()


def _data_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def _parse_vertex(token, lineno, source):
    try:
        v = int(token)
    except ValueError:
        raise ParseError(f"vertex id {token!r} is not an integer", lineno, source) from None
    if v < 0:
        raise ParseError(f"vertex id {v} is negative", lineno, source)
    return v


def parse_edge_list(text, source=None):
    """Parse ``v1 v2 weight`` records; weights are seconds, returned in ms."""
    edges = []
    for lineno, line in _data_lines(text):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'v1 v2 weight', got {line!r}", lineno, source)
        u = _parse_vertex(parts[0], lineno, source)
        v = _parse_vertex(parts[1], lineno, source)
        try:
            w = seconds_to_ms(parts[2])
        except ValueError:
            raise ParseError(f"weight {parts[2]!r} is not a number", lineno, source) from None
        if Decimal(parts[2]) <= 0:
            raise ValidationError(
                f"{source or '<edges>'}:{lineno}: weight must be positive, got {parts[2]}")
        if w <= 0:
            raise ValidationError(
                f"{source or '<edges>'}:{lineno}: weight {parts[2]} is below 1 ms resolution")
        if u == v:
            raise ValidationError(f"{source or '<edges>'}:{lineno}: self-loop on vertex {u}")
        edges.append((u, v, w))
    return edges


def parse_coords(text, source=None):
    coords = {}
    for lineno, line in _data_lines(text):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'v x y', got {line!r}", lineno, source)
        v = _parse_vertex(parts[0], lineno, source)
        try:
            coords[v] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise ParseError(f"bad coordinates in {line!r}", lineno, source) from None
    return coords


def load_network(source, coords=None) -> RoadNetwork:
    """Build a network from an edge-list document.

    ``source`` is either a path or the document text itself; ``coords`` may be
    a path, coordinate text, or a ready ``{vertex: (x, y)}`` mapping.
    Duplicate edges collapse to their minimum weight.
    """
    text, name = _read(source)
    edges = parse_edge_list(text, name)
    if coords is not None and not isinstance(coords, dict):
        ctext, cname = _read(coords)
        coords = parse_coords(ctext, cname)
    net = RoadNetwork(edges, coords)
    if coords:
        missing = {v for e in edges for v in e[:2]} - set(coords)
        if missing:
            raise ValidationError(f"{len(missing)} vertices lack coordinates, e.g. {min(missing)}")
    return net


def _read(source):
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                    and Path(source).exists()):
        p = Path(source)
        return p.read_text(), str(p)
    return str(source), None


def write_network(net: RoadNetwork, edge_path, coord_path=None):
    lines = ["# v1 v2 travel_time_seconds"]
    for u, v, w in sorted(net.edges()):
        lines.append(f"{u} {v} {Decimal(w) / MS_PER_SECOND}")
    Path(edge_path).write_text("\n".join(lines) + "\n")
    if coord_path is not None:
        clines = ["# v x y"]
        for v in sorted(net.coords):
            x, y = net.coords[v]
            clines.append(f"{v} {x!r} {y!r}")
        Path(coord_path).write_text("\n".join(clines) + "\n")


def multi_target_fastest_paths(net: RoadNetwork, source, targets=None) -> dict:
    """Fastest travel time (ms) from ``source`` to each target.

    With ``targets=None`` every vertex is a target. The label-setting search
    stops as soon as every target is settled; unreachable targets map to INF.
    """
    net.check_vertex(source)
    if targets is None:
        remaining = set(net.vertices)
    else:
        remaining = set(targets)
        for t in remaining:
            net.check_vertex(t)
    wanted = set(remaining)
    dist = {source: 0}
    settled = set()
    heap = [(0, source)]
    while heap and remaining:
        d, u = heappop(heap)
        if u in settled:
            continue
        settled.add(u)
        remaining.discard(u)
        for v, w in net.neighbors(u).items():
            nd = d + w
            if v not in settled and nd < dist.get(v, INF):
                dist[v] = nd
                heappush(heap, (nd, v))
    return {t: (dist[t] if t in settled else INF) for t in wanted}


class TravelTimeTable:
    """Symmetric fastest-path times between a fixed set of vertices."""

    def __init__(self, vertices, entries):
        self.vertices = tuple(sorted(set(vertices)))
        self._t = dict(entries)

    def __call__(self, a, b):
        if a == b:
            return 0
        return self._t[(a, b) if a < b else (b, a)]

    def get(self, a, b):
        return self(a, b)

    def items(self):
        return self._t.items()

    def __len__(self):
        return len(self._t) + len(self.vertices)


def precompute_store_pair_times(net: RoadNetwork, stores) -> TravelTimeTable:
    """Fastest-path time between every pair of store vertices (one search per source)."""
    verts = sorted(set(stores))
    for v in verts:
        net.check_vertex(v)
    entries = {}
    for i, a in enumerate(verts):
        rest = verts[i + 1:]
        if not rest:
            continue
        dist = multi_target_fastest_paths(net, a, rest)
        for b in rest:
            entries[(a, b)] = dist[b]
    return TravelTimeTable(verts, entries)


# ---------------------------------------------------------------------------
# Cache sidecar
#
# JSON object: {"format": "psdroute-travel-times", "version": 1, "key": <sha256>,
#               "vertices": [...], "entries": [[a, b, ms | null], ...]}
# null encodes an unreachable pair.

CACHE_FORMAT = "psdroute-travel-times"
CACHE_VERSION = 1


class CacheError(RuntimeError):
    pass


def table_cache_key(net: RoadNetwork, stores):
    h = hashlib.sha256(net.content_hash().encode())
    h.update(",".join(str(v) for v in sorted(set(stores))).encode())
    return h.hexdigest()


def save_table(table: TravelTimeTable, path, key):
    doc = {
        "format": CACHE_FORMAT,
        "version": CACHE_VERSION,
        "key": key,
        "vertices": list(table.vertices),
        "entries": [[a, b, None if t == INF else t] for (a, b), t in sorted(table.items())],
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")))


def load_table(path, key=None) -> TravelTimeTable:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheError(f"unreadable cache {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != CACHE_FORMAT:
        raise CacheError(f"{path}: not a travel-time cache")
    if doc.get("version") != CACHE_VERSION:
        raise CacheError(f"{path}: unsupported cache version {doc.get('version')!r}")
    if key is not None and doc.get("key") != key:
        raise CacheError(f"{path}: cache key mismatch")
    try:
        entries = {(a, b): (INF if t is None else t) for a, b, t in doc["entries"]}
        return TravelTimeTable(doc["vertices"], entries)
    except (KeyError, TypeError, ValueError) as exc:
        raise CacheError(f"{path}: corrupt cache body") from exc
