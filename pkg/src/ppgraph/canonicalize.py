"""Annotation canonicalization.

Raw endpoint annotations are incomplete: junctions sit slightly off their
lines, collinear runs are split into pieces, crossings are often missing, and
duplicated fragments abound. Canonicalization repairs this with a fixed
sequence of cleanup steps:

1. drop junctions that belong to no segment,
2. chain collinear fragments into their longest carrier and mark every
   junction on a carrier as pairwise connected,
3. drop carriers whose inner-junction set is contained in another's,
4. refit each surviving carrier to its inner junctions,
5. move junctions shared by crossing carriers to the least-squares
   intersection of their lines,
6. insert junctions at carrier-pair intersections that have none, and
7. emit the canonically ordered graph.

``canonicalize`` iterates this round map, with coordinates snapped to the
1e-4 grid used by the JSON interchange format, until the state map reaches a
bit-exact fixed point (or a cycle, resolved to its byte-wise minimal state).
That construction makes canonicalization exactly idempotent, which a single
pass over floating-point refits cannot be. The individual step functions keep
their plain single-pass semantics.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Line,
    direction_angle_deg,
    fit_line_tls,
    least_squares_point,
    line_through,
)
from .graph import Junction, LineGraph, Segment, build_graph

_TOUCH_EPS = 1e-7
_EXTENT_EPS = 1e-9
_MAX_ROUNDS = 256
# Refinement moves smaller than this are not applied. Sub-deadband adjustments
# are far below annotation noise and every downstream tolerance; dropping them
# turns the refit/refine iteration into a finite process with a literal fixed
# point (marginally stable junction/line feedback can otherwise drift by
# ~1e-3 px per round indefinitely).
_MOVE_DEADBAND = 0.05


class AnnotationError(ValueError):
    """Malformed raw annotation."""


@dataclass(frozen=True)
class CanonConfig:
    belt_width: float = 2.0
    inner_dist: float = 2.0
    min_angle_deg: float = 5.0
    merge_tol: float = 3.0

    def __post_init__(self):
        for name in ("belt_width", "inner_dist", "min_angle_deg", "merge_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0.0 < self.min_angle_deg <= 90.0):
            raise ValueError("min_angle_deg must be in (0, 90]")


@dataclass
class RawAnnotation:
    """Endpoint-style annotation: junction list plus segment index pairs."""

    width: int
    height: int
    junctions: list[tuple[float, float]]
    segments: list[tuple[int, int]]

    def __post_init__(self):
        n = len(self.junctions)
        for i, j in self.segments:
            if not (0 <= i < n and 0 <= j < n):
                raise AnnotationError(f"segment index ({i}, {j}) out of range for {n} junctions")
            if i == j:
                raise AnnotationError(f"segment with identical endpoints ({i}, {j})")

    def points(self) -> np.ndarray:
        return np.array(self.junctions, dtype=float).reshape(-1, 2)


def annotation_from_json(text: str) -> RawAnnotation:
    data = json.loads(text)
    try:
        return RawAnnotation(
            width=int(data["width"]),
            height=int(data["height"]),
            junctions=[(float(x), float(y)) for x, y in data["junctions"]],
            segments=[(int(i), int(j)) for i, j in data["segments"]],
        )
    except (KeyError, TypeError) as e:
        raise AnnotationError(f"annotation JSON missing or malformed field: {e}") from e


def annotation_to_json(a: RawAnnotation) -> str:
    return json.dumps(
        {
            "width": a.width,
            "height": a.height,
            "junctions": [[x, y] for x, y in a.junctions],
            "segments": [[i, j] for i, j in a.segments],
        },
        separators=(",", ":"),
    )


def load_annotation(path) -> RawAnnotation:
    with open(path, "r", encoding="utf-8") as f:
        return annotation_from_json(f.read())


def save_annotation(a: RawAnnotation, path) -> None:
    with open(path, "w", encoding="ascii") as f:
        f.write(annotation_to_json(a))
        f.write("\n")


def graph_as_annotation(g: LineGraph) -> RawAnnotation:
    """View a graph as a raw annotation (every edge becomes a segment)."""
    return RawAnnotation(
        width=g.width,
        height=g.height,
        junctions=[(j.x, j.y) for j in g.junctions],
        segments=list(g.edges()),
    )


# ---------------------------------------------------------------------------
# Step 1
# ---------------------------------------------------------------------------

def remove_isolated(a: RawAnnotation) -> RawAnnotation:
    """Drop junctions used by no segment and remap segment indices."""
    used = sorted({i for seg in a.segments for i in seg})
    remap = {old: new for new, old in enumerate(used)}
    return RawAnnotation(
        width=a.width,
        height=a.height,
        junctions=[a.junctions[i] for i in used],
        segments=[(remap[i], remap[j]) for i, j in a.segments],
    )


# ---------------------------------------------------------------------------
# Step 2
# ---------------------------------------------------------------------------

@dataclass
class Chain:
    """A maximal collinear run of annotated segments.

    ``members`` are input segment indices, ``junction_ids`` their endpoint
    junctions, ``endpoints`` the furthest pair along the fitted line.
    """

    members: frozenset[int]
    junction_ids: frozenset[int]
    line: Line
    endpoints: tuple[int, int]
    extent: tuple[float, float]

    def length(self) -> float:
        return self.extent[1] - self.extent[0]


@dataclass
class Connectivity:
    chains: list[Chain] = field(default_factory=list)
    edges: set[tuple[int, int]] = field(default_factory=set)


def _segment_line(points: np.ndarray, seg: tuple[int, int]) -> Line:
    return line_through(points[seg[0]], points[seg[1]])


def _fit_points(points: np.ndarray, ids: list[int]) -> Line | None:
    return fit_line_tls(points[sorted(ids)])


def _build_chain(
    points: np.ndarray, segments: list[tuple[int, int]], seed: int, belt: float
) -> Chain:
    members = {seed}
    ids = set(segments[seed])
    line = _segment_line(points, segments[seed])
    changed = True
    while changed:
        changed = False
        params = line.project_params(points[sorted(ids)])
        lo, hi = float(params.min()), float(params.max())
        for t, (u, v) in enumerate(segments):
            if t in members:
                continue
            if line.distance(points[u]) > belt or line.distance(points[v]) > belt:
                continue
            pu, pv = line.project_params(points[[u, v]])
            if max(pu, pv) < lo - _TOUCH_EPS or min(pu, pv) > hi + _TOUCH_EPS:
                continue
            members.add(t)
            ids.update((u, v))
            refit = _fit_points(points, sorted(ids))
            if refit is not None:
                line = refit
            params = line.project_params(points[sorted(ids)])
            lo, hi = float(params.min()), float(params.max())
            changed = True
    ordered = sorted(ids)
    params = line.project_params(points[ordered])
    i_lo = ordered[int(np.argmin(params))]
    i_hi = ordered[int(np.argmax(params))]
    return Chain(
        members=frozenset(members),
        junction_ids=frozenset(ids),
        line=line,
        endpoints=(i_lo, i_hi),
        extent=(float(params.min()), float(params.max())),
    )


def _on_chain(points: np.ndarray, chain: Chain, dist: float) -> list[int]:
    """Junction indices within ``dist`` of the chain line and inside its extent."""
    offs = np.abs(chain.line.signed_offsets(points))
    params = chain.line.project_params(points)
    lo, hi = chain.extent
    sel = (offs <= dist) & (params >= lo - _EXTENT_EPS) & (params <= hi + _EXTENT_EPS)
    return np.nonzero(sel)[0].tolist()


def extend_to_longest(a: RawAnnotation, cfg: CanonConfig) -> Connectivity:
    """Chain collinear fragments and mark all junctions on a chain connected.

    Each segment seeds a greedy chain search: any segment whose endpoints lie
    within ``belt_width`` of the running fitted line and whose extent touches
    the chain is absorbed, the line refit, and the scan repeated to a fixed
    point. Every junction lying on a resulting chain (same belt test) is
    connected pairwise with the others on it.
    """
    points = a.points()
    chains: list[Chain] = []
    seen: set[frozenset[int]] = set()
    for seed in range(len(a.segments)):
        u, v = a.segments[seed]
        if tuple(points[u]) == tuple(points[v]):
            continue  # coordinate-degenerate segment cannot seed a line
        chain = _build_chain(points, a.segments, seed, cfg.belt_width)
        if chain.junction_ids not in seen:
            seen.add(chain.junction_ids)
            chains.append(chain)
    edges: set[tuple[int, int]] = set()
    for chain in chains:
        on = _on_chain(points, chain, cfg.belt_width)
        for ai in range(len(on)):
            for bi in range(ai + 1, len(on)):
                edges.add((on[ai], on[bi]))
    return Connectivity(chains=chains, edges=edges)


# ---------------------------------------------------------------------------
# Step 3
# ---------------------------------------------------------------------------

def inner_junctions(points: np.ndarray, chain: Chain, cfg: CanonConfig) -> frozenset[int]:
    return frozenset(_on_chain(points, chain, cfg.inner_dist))


def remove_subsumed(
    chains: list[Chain], points: np.ndarray, cfg: CanonConfig
) -> list[Chain]:
    """Drop a chain when its inner junctions are a subset of a survivor's.

    Candidates are visited longest first so that of two chains with equal
    inner sets exactly one survives, deterministically.
    """
    inner = {id(c): inner_junctions(points, c, cfg) for c in chains}
    order = sorted(
        range(len(chains)),
        key=lambda k: (-chains[k].length(), sorted(chains[k].junction_ids)),
    )
    kept: list[int] = []
    for k in order:
        mine = inner[id(chains[k])]
        if any(mine <= inner[id(chains[j])] for j in kept):
            continue
        kept.append(k)
    return [chains[k] for k in sorted(kept)]


# ---------------------------------------------------------------------------
# Step 4
# ---------------------------------------------------------------------------

def refit_segment(seg: Segment, inner: np.ndarray) -> Segment:
    """Refit a segment to its inner junctions.

    Returns the segment whose endpoints are the projections of the two
    extreme inner junctions onto the total-least-squares line. Degenerate
    inner sets (all points coincident) keep the original segment.
    """
    pts = np.asarray(inner, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        raise ValueError("refit needs at least two inner junctions")
    line = fit_line_tls(pts)
    if line is None:
        warnings.warn("degenerate inner junction set; keeping original segment")
        return seg
    params = line.project_params(pts)
    a = line.project(pts[int(np.argmin(params))])
    b = line.project(pts[int(np.argmax(params))])
    # Preserve the input orientation.
    dx, dy = seg.b.x - seg.a.x, seg.b.y - seg.a.y
    if dx * (b[0] - a[0]) + dy * (b[1] - a[1]) < 0:
        a, b = b, a
    return Segment(Junction(*a), Junction(*b))


# ---------------------------------------------------------------------------
# Step 5
# ---------------------------------------------------------------------------

def refine_intersections(
    points: np.ndarray, incident: list[list[Line]], cfg: CanonConfig
) -> np.ndarray:
    """Move junctions on >= 2 crossing lines to the stacked least-squares point.

    A junction is refined only when some pair of its incident lines crosses
    at ``min_angle_deg`` or more; near-parallel bundles are left untouched
    because the solve is ill-conditioned there.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2).copy()
    if len(incident) != len(pts):
        raise ValueError("one incident-line list required per junction")
    for i, lines in enumerate(incident):
        if len(lines) < 2:
            continue
        widest = max(
            lines[a].angle_to(lines[b])
            for a in range(len(lines))
            for b in range(a + 1, len(lines))
        )
        if widest < cfg.min_angle_deg:
            continue
        sol = least_squares_point(lines)
        if sol is not None:
            pts[i] = sol
    return pts


# ---------------------------------------------------------------------------
# Step 6
# ---------------------------------------------------------------------------

def retrieve_missing(
    segments: list[tuple[tuple[float, float], tuple[float, float]]],
    points: np.ndarray,
    cfg: CanonConfig,
) -> list[tuple[tuple[float, float], int, int]]:
    """Intersections of segment pairs that have no junction within merge_tol.

    Only crossings strictly interior to both segments and at an angle of at
    least ``min_angle_deg`` qualify. Returns (point, host_a, host_b) triples.
    """
    from .geometry import segment_intersection

    existing = np.asarray(points, dtype=float).reshape(-1, 2)
    found: list[tuple[tuple[float, float], int, int]] = []
    for i in range(len(segments)):
        (a1, a2) = segments[i]
        for j in range(i + 1, len(segments)):
            (b1, b2) = segments[j]
            p = segment_intersection(a1, a2, b1, b2)
            if p is None:
                continue
            ang = direction_angle_deg(
                a2[0] - a1[0], a2[1] - a1[1], b2[0] - b1[0], b2[1] - b1[1]
            )
            if ang < cfg.min_angle_deg:
                continue
            arr = np.array(p)
            if len(existing) and np.min(np.linalg.norm(existing - arr, axis=1)) <= cfg.merge_tol:
                continue
            if any(np.hypot(p[0] - q[0][0], p[1] - q[0][1]) <= cfg.merge_tol for q in found):
                continue
            found.append((p, i, j))
    return found


# ---------------------------------------------------------------------------
# Step 7: full composition
# ---------------------------------------------------------------------------

def _quant(v: float) -> float:
    x = float(format(v, ".4f"))
    return 0.0 if x == 0.0 else x


def _snap(x: float, y: float, width: int, height: int) -> tuple[float, float]:
    x = min(max(x, 0.0), width - 1e-4)
    y = min(max(y, 0.0), height - 1e-4)
    return (_quant(x), _quant(y))


def _in_frame(x: float, y: float, width: int, height: int) -> bool:
    return 0.0 <= x <= width - 1e-4 and 0.0 <= y <= height - 1e-4


_State = tuple[tuple[tuple[float, float], ...], tuple[tuple[int, int], ...]]


def _canonical_state(
    points: list[tuple[float, float]], edges: set[tuple[int, int]]
) -> _State:
    order = sorted(range(len(points)), key=lambda i: (points[i][1], points[i][0]))
    remap = {old: new for new, old in enumerate(order)}
    pts = tuple(points[i] for i in order)
    pairs = {(min(remap[i], remap[j]), max(remap[i], remap[j])) for i, j in edges if i != j}
    return (pts, tuple(sorted(pairs)))


def _merge_close(
    points: list[tuple[float, float]],
    edges: set[tuple[int, int]],
    cfg: CanonConfig,
    width: int,
    height: int,
) -> tuple[list[tuple[float, float]], set[tuple[int, int]]]:
    from .graph import _single_linkage_labels

    if not points:
        return points, edges
    arr = np.array(points, dtype=float)
    labels = _single_linkage_labels(arr, cfg.merge_tol)
    uniq = sorted(set(labels.tolist()))
    if len(uniq) == len(points):
        return points, edges
    newid = {lab: k for k, lab in enumerate(uniq)}
    merged = []
    for lab in uniq:
        sel = arr[labels == lab]
        merged.append(_snap(float(sel[:, 0].mean()), float(sel[:, 1].mean()), width, height))
    remap = {i: newid[int(labels[i])] for i in range(len(points))}
    new_edges = {
        (min(remap[i], remap[j]), max(remap[i], remap[j]))
        for i, j in edges
        if remap[i] != remap[j]
    }
    # Centroids may themselves still be close; recurse until separated.
    return _merge_close(merged, new_edges, cfg, width, height)


def _round(state: _State, width: int, height: int, cfg: CanonConfig) -> _State:
    points = list(state[0])
    edges = set(state[1])

    points, edges = _merge_close(points, edges, cfg, width, height)

    used = sorted({i for e in edges for i in e})
    remap = {old: new for new, old in enumerate(used)}
    points = [points[i] for i in used]
    edges = {(remap[i], remap[j]) for i, j in edges}
    if not points:
        return _canonical_state([], set())

    ann = RawAnnotation(width, height, points, sorted(edges))
    conn = extend_to_longest(ann, cfg)
    pts = ann.points()
    survivors = remove_subsumed(conn.chains, pts, cfg)

    # One synchronous refit/refine step over the surviving chains.
    chain_inner: list[list[int]] = []
    chain_lines: list[Line] = []
    for chain in survivors:
        ids = sorted(inner_junctions(pts, chain, cfg))
        if len(ids) < 2:
            ids = sorted(chain.junction_ids)
        line = _fit_points(pts, ids)
        chain_inner.append(ids)
        chain_lines.append(line if line is not None else chain.line)

    incident: list[list[Line]] = [[] for _ in points]
    for ids, line in zip(chain_inner, chain_lines):
        for i in ids:
            incident[i].append(line)

    moved: list[tuple[float, float]] = []
    for i, (x, y) in enumerate(points):
        lines = incident[i]
        if len(lines) == 0:
            proposal = None
        elif len(lines) == 1:
            proposal = lines[0].project((x, y))
        else:
            widest = max(
                lines[a].angle_to(lines[b])
                for a in range(len(lines))
                for b in range(a + 1, len(lines))
            )
            proposal = least_squares_point(lines) if widest >= cfg.min_angle_deg else None
        if proposal is None or not _in_frame(proposal[0], proposal[1], width, height):
            # Refinement never pushes a junction out of frame; freezing beats
            # sliding along the clamped border without ever settling.
            moved.append((x, y))
            continue
        tx, ty = _quant(proposal[0]), _quant(proposal[1])
        if math.hypot(tx - x, ty - y) <= _MOVE_DEADBAND:
            moved.append((x, y))
        else:
            moved.append((tx, ty))

    # Missing-crossing recovery on the moved geometry.
    seg_geoms = []
    seg_on = []
    for chain in survivors:
        e0, e1 = chain.endpoints
        seg_geoms.append((moved[e0], moved[e1]))
        seg_on.append(_on_chain(pts, chain, cfg.belt_width))
    new_points = list(moved)
    new_edges = set(edges)
    for p, hi, hj in retrieve_missing(seg_geoms, np.array(moved).reshape(-1, 2), cfg):
        idx = len(new_points)
        new_points.append(_snap(p[0], p[1], width, height))
        for host in (hi, hj):
            for m in seg_on[host]:
                new_edges.add((min(m, idx), max(m, idx)))

    new_edges.update(conn.edges)
    return _canonical_state(new_points, new_edges)


def canonicalize(a: RawAnnotation, cfg: CanonConfig | None = None) -> LineGraph:
    """Run the full cleanup to its fixed point and build the graph.

    Deterministic: identical annotations produce byte-identical graphs, and
    the result is exactly idempotent (canonicalizing a canonical graph's own
    annotation view returns the same graph).
    """
    if cfg is None:
        cfg = CanonConfig()
    points = [_snap(x, y, a.width, a.height) for x, y in a.junctions]
    edges = {(min(i, j), max(i, j)) for i, j in a.segments}
    state = _canonical_state(points, edges)

    seen: dict[_State, int] = {state: 0}
    trail: list[_State] = [state]
    for _ in range(_MAX_ROUNDS):
        nxt = _round(state, a.width, a.height, cfg)
        if nxt == state:
            break
        if nxt in seen:
            cycle = trail[seen[nxt]:]
            state = min(cycle)
            break
        seen[nxt] = len(trail)
        trail.append(nxt)
        state = nxt
    else:
        warnings.warn("canonicalization did not reach a fixed point; returning last state")

    return build_graph(a.width, a.height, list(state[0]), list(state[1]))
