import math

import numpy as np
import pytest

from ppgraph.geometry import (
    DegenerateGeometry,
    Line,
    direction_angle_deg,
    fit_line_tls,
    intersect_lines,
    least_squares_point,
    line_through,
    point_segment_distance,
    segment_intersection,
)

from conftest import rng_for


def eigen_fit(points):
    """Oracle: principal eigenvector of the 2x2 scatter matrix."""
    pts = np.asarray(points, dtype=float)
    c = pts.mean(axis=0)
    d = pts - c
    m = d.T @ d
    w, v = np.linalg.eigh(m)
    direction = v[:, int(np.argmax(w))]
    normal = np.array([-direction[1], direction[0]])
    return normal / np.linalg.norm(normal), c


class TestLine:
    def test_canonical_sign(self):
        a = Line(0.0, -2.0, 4.0)
        assert a.ny > 0 and a.c == -2.0

    def test_distance_and_projection(self):
        ln = line_through((0, 0), (10, 0))
        assert ln.distance((5, 3)) == pytest.approx(3.0)
        assert ln.project((5, 3)) == pytest.approx((5.0, 0.0))

    def test_angle(self):
        h = line_through((0, 0), (1, 0))
        v = line_through((0, 0), (0, 1))
        d = line_through((0, 0), (1, 1))
        assert h.angle_to(v) == pytest.approx(90.0)
        assert h.angle_to(d) == pytest.approx(45.0)
        assert h.angle_to(h) == pytest.approx(0.0)


class TestFit:
    def test_two_points_exact(self):
        ln = fit_line_tls(np.array([[0.0, 0.0], [10.0, 5.0]]))
        assert ln.distance((0, 0)) < 1e-12
        assert ln.distance((10, 5)) < 1e-12

    def test_matches_eigen_oracle(self):
        rng = rng_for(11)
        for _ in range(50):
            n = int(rng.integers(3, 12))
            base = rng.uniform(0, 100, size=2)
            d = rng.uniform(-1, 1, size=2)
            d /= np.linalg.norm(d)
            t = rng.uniform(0, 80, size=n)
            noise = rng.normal(0, 0.5, size=n)
            pts = base + t[:, None] * d + noise[:, None] * np.array([-d[1], d[0]])
            ln = fit_line_tls(pts)
            normal, centroid = eigen_fit(pts)
            assert abs(abs(ln.nx * normal[0] + ln.ny * normal[1]) - 1.0) < 1e-9
            assert ln.distance(centroid) < 1e-9

    def test_order_independent(self):
        rng = rng_for(7)
        pts = rng.uniform(0, 50, size=(8, 2))
        a = fit_line_tls(pts)
        b = fit_line_tls(pts[::-1])
        assert (a.nx, a.ny, a.c) == (b.nx, b.ny, b.c)

    def test_coincident_points(self):
        assert fit_line_tls(np.array([[3.0, 4.0], [3.0, 4.0]])) is None


class TestIntersections:
    def test_perpendicular(self):
        h = line_through((0, 50), (100, 50))
        v = line_through((50, 0), (50, 100))
        assert intersect_lines(h, v) == pytest.approx((50.0, 50.0))

    def test_parallel(self):
        a = line_through((0, 0), (10, 0))
        b = line_through((0, 5), (10, 5))
        assert intersect_lines(a, b) is None

    def test_least_squares_matches_lstsq(self):
        rng = rng_for(3)
        for _ in range(30):
            lines = []
            for _ in range(int(rng.integers(2, 5))):
                p = rng.uniform(0, 100, size=2)
                q = rng.uniform(0, 100, size=2)
                if np.linalg.norm(p - q) < 1.0:
                    continue
                lines.append(line_through(p, q))
            if len(lines) < 2:
                continue
            sol = least_squares_point(lines)
            a = np.array([[ln.nx, ln.ny] for ln in lines])
            b = np.array([ln.c for ln in lines])
            ref, *_ = np.linalg.lstsq(a, b, rcond=None)
            if sol is None:
                continue
            assert sol == pytest.approx(tuple(ref), abs=1e-6)

    def test_segment_intersection_interior_only(self):
        assert segment_intersection((0, 0), (10, 10), (0, 10), (10, 0)) == pytest.approx((5, 5))
        # Touching at an endpoint is not interior.
        assert segment_intersection((0, 0), (10, 0), (10, 0), (10, 10)) is None
        assert segment_intersection((0, 0), (10, 0), (0, 5), (10, 5)) is None


def test_point_segment_distance():
    assert point_segment_distance((5, 3), (0, 0), (10, 0)) == pytest.approx(3.0)
    assert point_segment_distance((-4, 3), (0, 0), (10, 0)) == pytest.approx(5.0)
    assert point_segment_distance((2, 2), (1, 1), (1, 1)) == pytest.approx(math.sqrt(2))


def test_direction_angle_folding():
    assert direction_angle_deg(1, 0, -1, 0) == pytest.approx(0.0)
    assert direction_angle_deg(1, 0, 0, 1) == pytest.approx(90.0)
    with pytest.raises(DegenerateGeometry):
        direction_angle_deg(0, 0, 1, 0)
