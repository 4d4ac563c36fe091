"""Point-pair graph data model.

A line-segment scene is a set of junctions plus a symmetric boolean adjacency
matrix: every connected junction pair is a line segment. The same scene can be
viewed as a set of maximal endpoint segments; both conversions live here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

GRAPH_JSON_VERSION = 1

_EXTENT_EPS = 1e-9


class GraphInvariantError(ValueError):
    """A LineGraph structural invariant does not hold."""


@dataclass(frozen=True, order=True)
class Junction:
    """Subpixel image point where segments start, end or cross."""

    x: float
    y: float

    def dist(self, other: "Junction") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Segment:
    a: Junction
    b: Junction

    def __post_init__(self):
        if self.a == self.b:
            raise GraphInvariantError("zero-length segment")

    @property
    def length(self) -> float:
        return self.a.dist(self.b)

    def key(self) -> tuple:
        """Endpoint-order-independent identity."""
        p = (self.a.x, self.a.y)
        q = (self.b.x, self.b.y)
        return (min(p, q), max(p, q))


class SegmentSet:
    """Unordered duplicate-free collection of segments in a frame."""

    def __init__(self, width: int, height: int, segments: Iterable[Segment] = ()):
        self.width = int(width)
        self.height = int(height)
        self._by_key: dict[tuple, Segment] = {}
        for s in segments:
            self.add(s)

    def add(self, s: Segment) -> None:
        self._by_key.setdefault(s.key(), s)

    @property
    def segments(self) -> list[Segment]:
        return [self._by_key[k] for k in sorted(self._by_key)]

    def __len__(self) -> int:
        return len(self._by_key)

    def __iter__(self):
        return iter(self.segments)


class LineGraph:
    """Ordered junction list plus symmetric boolean adjacency.

    Immutable after construction: the junction and adjacency arrays are
    write-protected, so instances are safe to share across threads.
    """

    def __init__(
        self,
        width: int,
        height: int,
        junctions: Sequence[Junction] | np.ndarray,
        adjacency: np.ndarray,
    ):
        if isinstance(junctions, np.ndarray):
            pts = np.array(junctions, dtype=float).reshape(-1, 2)
            junctions = [Junction(float(x), float(y)) for x, y in pts]
        self.width = int(width)
        self.height = int(height)
        self.junctions: tuple[Junction, ...] = tuple(junctions)
        adj = np.array(adjacency, dtype=bool)
        k = len(self.junctions)
        if adj.shape != (k, k):
            raise GraphInvariantError(f"adjacency shape {adj.shape} != ({k}, {k})")
        if not np.array_equal(adj, adj.T):
            raise GraphInvariantError("adjacency not symmetric")
        if adj.trace() != 0:
            raise GraphInvariantError("adjacency diagonal not zero")
        for j in self.junctions:
            if not (math.isfinite(j.x) and math.isfinite(j.y)):
                raise GraphInvariantError(f"non-finite junction {j}")
            if not (0.0 <= j.x < self.width and 0.0 <= j.y < self.height):
                raise GraphInvariantError(f"junction {j} outside {self.width}x{self.height} frame")
        adj.setflags(write=False)
        self.adjacency = adj

    @property
    def size(self) -> int:
        return len(self.junctions)

    def coords(self) -> np.ndarray:
        """K x 2 float array of junction coordinates."""
        return np.array([(j.x, j.y) for j in self.junctions], dtype=float).reshape(-1, 2)

    def edges(self) -> list[tuple[int, int]]:
        """Sorted (i, j) pairs with i < j."""
        ii, jj = np.nonzero(np.triu(self.adjacency, k=1))
        return sorted(zip(ii.tolist(), jj.tolist()))

    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    def degree(self, i: int) -> int:
        if not (0 <= i < self.size):
            raise IndexError(f"junction index {i} out of range [0, {self.size})")
        return int(self.adjacency[i].sum())

    def min_junction_separation(self) -> float:
        pts = self.coords()
        if len(pts) < 2:
            return math.inf
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        np.fill_diagonal(d, np.inf)
        return float(d.min())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LineGraph):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.junctions == other.junctions
            and np.array_equal(self.adjacency, other.adjacency)
        )

    def __repr__(self) -> str:
        return f"LineGraph({self.width}x{self.height}, K={self.size}, E={self.edge_count()})"


def build_graph(
    width: int,
    height: int,
    points: Sequence[tuple[float, float]],
    edges: Iterable[tuple[int, int]],
) -> LineGraph:
    """LineGraph in canonical junction order (ascending y, then x)."""
    pts = [(float(x), float(y)) for x, y in points]
    order = sorted(range(len(pts)), key=lambda i: (pts[i][1], pts[i][0]))
    remap = {old: new for new, old in enumerate(order)}
    k = len(pts)
    adj = np.zeros((k, k), dtype=bool)
    for i, j in edges:
        if i == j:
            raise GraphInvariantError("self-loop edge")
        a, b = remap[i], remap[j]
        adj[a, b] = adj[b, a] = True
    junctions = [Junction(*pts[i]) for i in order]
    return LineGraph(width, height, junctions, adj)


def degree(g: LineGraph, i: int) -> int:
    """Number of junctions connected to junction i."""
    return g.degree(i)


def _validate_adjacency(g: LineGraph) -> None:
    adj = np.asarray(g.adjacency)
    if not np.array_equal(adj, adj.T) or adj.trace() != 0:
        raise GraphInvariantError("invalid adjacency")


def graph_to_segments(g: LineGraph, collinear_tol: float = 2.0) -> SegmentSet:
    """Maximal endpoint segments of a graph.

    Every connected pair is a segment unless it is subsumed by a strictly
    longer connected pair whose carrier passes within ``collinear_tol`` of
    both its endpoints (inside the longer pair's extent).
    """
    _validate_adjacency(g)
    pts = g.coords()
    pairs = g.edges()
    out = SegmentSet(g.width, g.height)
    if not pairs:
        return out

    p = np.array([pts[i] for i, _ in pairs])
    q = np.array([pts[j] for _, j in pairs])
    d = q - p
    lengths = np.linalg.norm(d, axis=1)

    keep = []
    for e, (i, j) in enumerate(pairs):
        subsumed = False
        ends = np.array([pts[i], pts[j]])
        for f in range(len(pairs)):
            if f == e or lengths[f] <= lengths[e]:
                continue
            # Both endpoints inside the perpendicular band and extent of f.
            rel = ends - p[f]
            t = rel @ d[f] / (lengths[f] ** 2)
            if np.any(t < -_EXTENT_EPS) or np.any(t > 1.0 + _EXTENT_EPS):
                continue
            perp = np.abs(rel[:, 0] * d[f, 1] - rel[:, 1] * d[f, 0]) / lengths[f]
            if np.all(perp <= collinear_tol):
                subsumed = True
                break
        if not subsumed:
            keep.append((i, j))

    for i, j in keep:
        out.add(Segment(g.junctions[i], g.junctions[j]))
    return out


def segments_to_graph(s: SegmentSet, merge_tol: float = 3.0) -> LineGraph:
    """Graph whose junctions are the deduplicated segment endpoints.

    Endpoints are merged by single linkage at ``merge_tol`` (cluster
    representative: centroid of the distinct endpoint values). Each input
    segment becomes one edge; no collinear completion is performed here.
    """
    segs = s.segments
    if not segs:
        return build_graph(s.width, s.height, [], [])

    pts: list[tuple[float, float]] = []
    index: dict[tuple[float, float], int] = {}
    ends = []
    for seg in segs:
        pair = []
        for j in (seg.a, seg.b):
            key = (j.x, j.y)
            if key not in index:
                index[key] = len(pts)
                pts.append(key)
            pair.append(index[key])
        ends.append(tuple(pair))

    cur = np.array(pts, dtype=float)
    assign = np.arange(len(cur))
    # Re-merge until all representatives are pairwise separated; centroids of
    # merged clusters can themselves fall within merge_tol of a neighbor.
    while True:
        labels = _single_linkage_labels(cur, merge_tol)
        uniq = sorted(set(labels.tolist()))
        if len(uniq) == len(cur):
            break
        newid = {lab: k for k, lab in enumerate(uniq)}
        cur = np.array([cur[labels == lab].mean(axis=0) for lab in uniq])
        assign = np.array([newid[int(labels[a])] for a in assign])

    edges = set()
    for i, j in ends:
        a, b = int(assign[i]), int(assign[j])
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return build_graph(s.width, s.height, [tuple(p) for p in cur], edges)


def _single_linkage_labels(points: np.ndarray, cutoff: float) -> np.ndarray:
    """Connected-component labels of the <=cutoff proximity graph."""
    n = len(points)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n > 1:
        d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
        ii, jj = np.nonzero(d <= cutoff)
        for i, j in zip(ii.tolist(), jj.tolist()):
            if i < j:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    return np.array([find(i) for i in range(n)])


# ---------------------------------------------------------------------------
# Graph JSON (bit-exact interchange format)
# ---------------------------------------------------------------------------

def graph_to_json(g: LineGraph) -> str:
    """Serialize in the fixed interchange layout.

    Junctions ascending by (y, x) with 4-decimal coordinates; edges with
    i < j in lexicographic order. The output is byte-reproducible.
    """
    order = sorted(range(g.size), key=lambda i: (g.junctions[i].y, g.junctions[i].x))
    remap = {old: new for new, old in enumerate(order)}
    juncs = ",".join(
        f"[{g.junctions[i].x:.4f},{g.junctions[i].y:.4f}]" for i in order
    )
    pairs = sorted(
        (min(remap[i], remap[j]), max(remap[i], remap[j])) for i, j in g.edges()
    )
    edges = ",".join(f"[{i},{j}]" for i, j in pairs)
    return (
        f'{{"version":{GRAPH_JSON_VERSION},"width":{g.width},"height":{g.height},'
        f'"junctions":[{juncs}],"edges":[{edges}]}}'
    )


def graph_from_json(text: str) -> LineGraph:
    data = json.loads(text)
    if data.get("version") != GRAPH_JSON_VERSION:
        raise ValueError(f"unsupported graph version {data.get('version')!r}")
    return build_graph(
        data["width"],
        data["height"],
        [(float(x), float(y)) for x, y in data["junctions"]],
        [(int(i), int(j)) for i, j in data["edges"]],
    )


def save_graph(g: LineGraph, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(graph_to_json(g))
        f.write("\n")


def load_graph(path) -> LineGraph:
    with open(path, "r", encoding="ascii") as f:
        return graph_from_json(f.read())
