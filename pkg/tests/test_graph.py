import math

import numpy as np
import pytest

from ppgraph import (
    GraphInvariantError,
    Junction,
    LineGraph,
    Segment,
    SegmentSet,
    build_graph,
    degree,
    graph_from_json,
    graph_to_json,
    graph_to_segments,
    segments_to_graph,
)

from conftest import rng_for


def brute_force_maximal(g: LineGraph, tol: float):
    """Oracle: O(E^2) subsumption scan with an independent distance formula."""
    pts = [(j.x, j.y) for j in g.junctions]
    pairs = g.edges()

    def seg_len(e):
        (i, j) = e
        return math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1])

    def inside(p, a, b):
        ax, ay = a
        bx, by = b
        vx, vy = bx - ax, by - ay
        L2 = vx * vx + vy * vy
        t = ((p[0] - ax) * vx + (p[1] - ay) * vy) / L2
        if t < -1e-9 or t > 1 + 1e-9:
            return False
        tc = min(1.0, max(0.0, t))
        dx = p[0] - (ax + tc * vx)
        dy = p[1] - (ay + tc * vy)
        return math.hypot(dx, dy) <= tol

    keep = []
    for e in pairs:
        subsumed = False
        for f in pairs:
            if f == e or seg_len(f) <= seg_len(e):
                continue
            a, b = pts[f[0]], pts[f[1]]
            if inside(pts[e[0]], a, b) and inside(pts[e[1]], a, b):
                subsumed = True
                break
        if not subsumed:
            keep.append(e)
    return {
        (min(pts[i], pts[j]), max(pts[i], pts[j])) for i, j in keep
    }


def random_graph(seed: int, max_k: int = 8) -> LineGraph:
    """Random small graph; some seeds get a collinear triple to force subsumption."""
    rng = rng_for(seed)
    k = int(rng.integers(2, max_k + 1))
    pts = []
    while len(pts) < k:
        p = rng.uniform(5, 120, size=2)
        if all(np.linalg.norm(p - q) > 6.0 for q in pts):
            pts.append(p)
    pts = [tuple(map(float, p)) for p in pts]
    edges = set()
    if k >= 3 and rng.random() < 0.5:
        # Replace the first three points with a collinear, fully connected run.
        x0 = float(rng.uniform(5, 40))
        y0 = float(rng.uniform(5, 40))
        ang = rng.uniform(0, math.pi / 2)
        dx, dy = math.cos(ang), math.sin(ang)
        pts[0] = (x0, y0)
        pts[1] = (x0 + 40 * dx, y0 + 40 * dy)
        pts[2] = (x0 + 80 * dx, y0 + 80 * dy)
        edges |= {(0, 1), (1, 2), (0, 2)}
    for i in range(k):
        for j in range(i + 1, k):
            if rng.random() < 0.3:
                edges.add((i, j))
    for i in range(k):
        if not any(i in e for e in edges):
            j = int(rng.integers(0, k - 1))
            j = j if j != i else k - 1
            edges.add((min(i, j), max(i, j)))
    return build_graph(128, 128, pts, edges)


class TestLineGraph:
    def test_invariants_enforced(self):
        bad = np.array([[0, 1], [0, 0]], dtype=bool)
        with pytest.raises(GraphInvariantError):
            LineGraph(10, 10, [Junction(1, 1), Junction(2, 2)], bad)
        loop = np.array([[1, 0], [0, 0]], dtype=bool)
        with pytest.raises(GraphInvariantError):
            LineGraph(10, 10, [Junction(1, 1), Junction(2, 2)], loop)
        with pytest.raises(GraphInvariantError):
            LineGraph(10, 10, [Junction(1, 1), Junction(12, 2)], np.zeros((2, 2), bool))

    def test_canonical_order(self):
        g = build_graph(64, 64, [(5, 9), (2, 3), (7, 3)], [(0, 1)])
        assert [(j.x, j.y) for j in g.junctions] == [(2, 3), (7, 3), (5, 9)]
        assert g.edges() == [(0, 2)]

    def test_adjacency_immutable(self):
        g = build_graph(64, 64, [(1, 1), (2, 2)], [(0, 1)])
        with pytest.raises(ValueError):
            g.adjacency[0, 1] = False

    def test_symmetry_and_trace(self):
        for seed in range(20):
            g = random_graph(seed)
            assert np.array_equal(g.adjacency, g.adjacency.T)
            assert g.adjacency.trace() == 0


class TestDegree:
    def test_isolated_is_zero(self):
        g = build_graph(32, 32, [(1, 1), (5, 5), (9, 9)], [(1, 2)])
        assert degree(g, 0) == 0

    def test_triangle_vertex(self):
        g = build_graph(128, 128, [(0, 0), (100, 0), (0, 100)], [(0, 1), (1, 2), (0, 2)])
        assert [degree(g, i) for i in range(3)] == [2, 2, 2]

    def test_row_equals_column_sum(self):
        for seed in range(20):
            g = random_graph(seed)
            adj = g.adjacency.astype(int)
            for i in range(g.size):
                assert degree(g, i) == adj[:, i].sum()

    def test_out_of_range(self):
        g = build_graph(32, 32, [(1, 1), (5, 5)], [(0, 1)])
        with pytest.raises(IndexError):
            degree(g, 2)


class TestGraphToSegments:
    def test_collinear_chain_collapses(self):
        g = build_graph(
            128, 64, [(0, 0), (50, 0), (100, 0)], [(0, 1), (1, 2), (0, 2)]
        )
        segs = graph_to_segments(g, collinear_tol=2.0)
        assert len(segs) == 1
        (seg,) = segs.segments
        assert seg.key() == ((0.0, 0.0), (100.0, 0.0))

    def test_triangle_keeps_all(self):
        g = build_graph(
            128, 128, [(0, 0), (100, 0), (0, 100)], [(0, 1), (1, 2), (0, 2)]
        )
        assert len(graph_to_segments(g, 2.0)) == 3

    def test_matches_brute_force(self):
        for seed in range(200):
            g = random_graph(seed)
            got = {s.key() for s in graph_to_segments(g, 2.0)}
            assert got == brute_force_maximal(g, 2.0), f"seed {seed}"

    def test_output_self_consistent(self):
        # No output pair may subsume another output pair.
        for seed in range(50):
            g = random_graph(seed)
            segs = graph_to_segments(g, 2.0).segments
            pts = [(s.a, s.b) for s in segs]
            for i, (a1, b1) in enumerate(pts):
                for j, (a2, b2) in enumerate(pts):
                    if i == j or Segment(a2, b2).length <= Segment(a1, b1).length:
                        continue
                    line_len = Segment(a2, b2).length
                    ok = []
                    for p in (a1, b1):
                        t = ((p.x - a2.x) * (b2.x - a2.x) + (p.y - a2.y) * (b2.y - a2.y)) / line_len**2
                        perp = abs(
                            (p.x - a2.x) * (b2.y - a2.y) - (p.y - a2.y) * (b2.x - a2.x)
                        ) / line_len
                        ok.append(-1e-9 <= t <= 1 + 1e-9 and perp <= 2.0)
                    assert not all(ok)

    def test_rejects_tampered_adjacency(self):
        g = build_graph(32, 32, [(1, 1), (5, 5)], [(0, 1)])
        adj = np.array(g.adjacency)
        adj[0, 1] = False  # break symmetry
        g2 = object.__new__(LineGraph)
        g2.__dict__.update(g.__dict__)
        g2.adjacency = adj
        with pytest.raises(GraphInvariantError):
            graph_to_segments(g2, 2.0)


class TestSegmentsToGraph:
    def test_shared_endpoint(self):
        s = SegmentSet(128, 128)
        s.add(Segment(Junction(0, 0), Junction(50, 50)))
        s.add(Segment(Junction(50, 50), Junction(100, 0)))
        g = segments_to_graph(s, merge_tol=1.0)
        assert g.size == 3
        assert g.edge_count() == 2

    def test_nearby_endpoints_merge(self):
        s = SegmentSet(128, 128)
        s.add(Segment(Junction(0, 0), Junction(50, 50)))
        s.add(Segment(Junction(50.5, 50.2), Junction(100, 0)))
        g = segments_to_graph(s, merge_tol=1.0)
        assert g.size == 3

    def test_empty(self):
        g = segments_to_graph(SegmentSet(32, 32), merge_tol=1.0)
        assert g.size == 0 and g.edge_count() == 0

    def test_round_trip_preserves_structure(self):
        for seed in range(100):
            g = random_graph(seed)
            segs = graph_to_segments(g, 2.0)
            if len(segs) != g.edge_count():
                continue  # subsumption occurred; round trip not expected
            back = segments_to_graph(segs, merge_tol=3.0)
            assert back.size == g.size, f"seed {seed}"
            assert back.edge_count() == g.edge_count(), f"seed {seed}"
            assert np.array_equal(back.adjacency, g.adjacency), f"seed {seed}"


class TestGraphJson:
    def test_exact_layout(self):
        g = build_graph(64, 32, [(3.25, 7.5), (1.0, 2.0)], [(0, 1)])
        assert graph_to_json(g) == (
            '{"version":1,"width":64,"height":32,'
            '"junctions":[[1.0000,2.0000],[3.2500,7.5000]],"edges":[[0,1]]}'
        )

    def test_round_trip(self):
        for seed in range(20):
            g = random_graph(seed)
            h = graph_from_json(graph_to_json(g))
            assert h.width == g.width and h.height == g.height
            assert h.edges() == g.edges()
            got = [(j.x, j.y) for j in h.junctions]
            want = [(round(j.x, 4), round(j.y, 4)) for j in g.junctions]
            assert got == pytest.approx(want, abs=1e-9)

    def test_version_check(self):
        with pytest.raises(ValueError):
            graph_from_json('{"version":9,"width":1,"height":1,"junctions":[],"edges":[]}')
