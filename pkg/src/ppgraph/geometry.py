"""Planar geometry helpers shared by the graph, canonicalization and scoring code.

Lines are stored in Hesse normal form ``nx*x + ny*y = c`` with a unit normal
whose sign is canonicalized, so that identical point sets always produce
bit-identical line parameters.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class DegenerateGeometry(ValueError):
    """Raised when an operation receives geometrically degenerate input."""


def canonical_point_order(points: np.ndarray) -> np.ndarray:
    """Indices that sort points ascending by (y, x)."""
    pts = np.asarray(points, dtype=float)
    return np.lexsort((pts[:, 0], pts[:, 1]))


class Line:
    """Unit-normal line ``nx*x + ny*y = c``."""

    __slots__ = ("nx", "ny", "c")

    def __init__(self, nx: float, ny: float, c: float):
        norm = math.hypot(nx, ny)
        if norm == 0.0:
            raise DegenerateGeometry("zero normal vector")
        nx, ny, c = nx / norm, ny / norm, c / norm
        # Fixed sign: ny > 0, or ny == 0 and nx > 0.
        if ny < 0.0 or (ny == 0.0 and nx < 0.0):
            nx, ny, c = -nx, -ny, -c
        self.nx = nx
        self.ny = ny
        self.c = c

    @property
    def direction(self) -> tuple[float, float]:
        return (-self.ny, self.nx)

    def distance(self, p: Sequence[float]) -> float:
        return abs(self.nx * p[0] + self.ny * p[1] - self.c)

    def signed_offsets(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts[:, 0] * self.nx + pts[:, 1] * self.ny - self.c

    def project(self, p: Sequence[float]) -> tuple[float, float]:
        r = self.nx * p[0] + self.ny * p[1] - self.c
        return (p[0] - r * self.nx, p[1] - r * self.ny)

    def project_params(self, points: np.ndarray) -> np.ndarray:
        """Coordinates of points along the line direction (for extent tests)."""
        pts = np.asarray(points, dtype=float)
        dx, dy = self.direction
        return pts[:, 0] * dx + pts[:, 1] * dy

    def angle_to(self, other: "Line") -> float:
        """Crossing angle in degrees, in [0, 90]."""
        dot = abs(self.nx * other.nx + self.ny * other.ny)
        return math.degrees(math.acos(min(1.0, dot)))

    def __repr__(self) -> str:
        return f"Line({self.nx:.6f}, {self.ny:.6f}, {self.c:.6f})"


def line_through(a: Sequence[float], b: Sequence[float]) -> Line:
    """Line through two distinct points."""
    dx = b[0] - a[0]
    dy = b[1] - a[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("coincident points")
    # Normal is perpendicular to (dx, dy).
    return Line(dy, -dx, dy * a[0] - dx * a[1])


def fit_line_tls(points: np.ndarray) -> Line | None:
    """Total-least-squares line through >= 2 points.

    Minimizes the sum of squared perpendicular distances. Points are summed in
    canonical (y, x) order so the result does not depend on input ordering.
    Returns None when all points coincide.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise DegenerateGeometry("need at least two points")
    pts = pts[canonical_point_order(pts)]
    cx = float(np.mean(pts[:, 0]))
    cy = float(np.mean(pts[:, 1]))
    dx = pts[:, 0] - cx
    dy = pts[:, 1] - cy
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    sxy = float(np.dot(dx, dy))
    if sxx + syy == 0.0:
        return None
    # Principal direction of the 2x2 scatter matrix, closed form.
    theta = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
    ux, uy = math.cos(theta), math.sin(theta)
    nx, ny = -uy, ux
    return Line(nx, ny, nx * cx + ny * cy)


def intersect_lines(a: Line, b: Line) -> tuple[float, float] | None:
    """Intersection point of two lines; None when (near-)parallel."""
    det = a.nx * b.ny - a.ny * b.nx
    if abs(det) < 1e-12:
        return None
    x = (a.c * b.ny - b.c * a.ny) / det
    y = (a.nx * b.c - b.nx * a.c) / det
    return (x, y)


def least_squares_point(lines: Sequence[Line]) -> tuple[float, float] | None:
    """Point minimizing the sum of squared distances to the given lines.

    Solves the 2x2 normal equations of the stacked constraints n_i . p = c_i.
    Returns None when the system is rank deficient (near-parallel bundle).
    """
    a11 = a12 = a22 = b1 = b2 = 0.0
    for ln in sorted(lines, key=lambda l: (l.nx, l.ny, l.c)):
        a11 += ln.nx * ln.nx
        a12 += ln.nx * ln.ny
        a22 += ln.ny * ln.ny
        b1 += ln.nx * ln.c
        b2 += ln.ny * ln.c
    det = a11 * a22 - a12 * a12
    if abs(det) < 1e-9:
        return None
    x = (a22 * b1 - a12 * b2) / det
    y = (a11 * b2 - a12 * b1) / det
    return (x, y)


def point_segment_distance(p: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    """Euclidean distance from p to the closed segment ab."""
    ax, ay = a[0], a[1]
    vx, vy = b[0] - ax, b[1] - ay
    wx, wy = p[0] - ax, p[1] - ay
    vv = vx * vx + vy * vy
    if vv == 0.0:
        return math.hypot(wx, wy)
    t = (wx * vx + wy * vy) / vv
    t = min(1.0, max(0.0, t))
    return math.hypot(wx - t * vx, wy - t * vy)


def segment_intersection(
    a1: Sequence[float],
    a2: Sequence[float],
    b1: Sequence[float],
    b2: Sequence[float],
    ends_margin: float = 1e-9,
) -> tuple[float, float] | None:
    """Intersection strictly interior to both segments, else None.

    ``ends_margin`` is the parametric exclusion zone around endpoints, so
    shared endpoints do not count as interior crossings.
    """
    d1x, d1y = a2[0] - a1[0], a2[1] - a1[1]
    d2x, d2y = b2[0] - b1[0], b2[1] - b1[1]
    den = d1x * d2y - d1y * d2x
    if den == 0.0:
        return None
    ex, ey = b1[0] - a1[0], b1[1] - a1[1]
    t = (ex * d2y - ey * d2x) / den
    s = (ex * d1y - ey * d1x) / den
    if not (ends_margin < t < 1.0 - ends_margin):
        return None
    if not (ends_margin < s < 1.0 - ends_margin):
        return None
    return (a1[0] + t * d1x, a1[1] + t * d1y)


def direction_angle_deg(d1x: float, d1y: float, d2x: float, d2y: float) -> float:
    """Unsigned angle between two directions, folded into [0, 90] degrees."""
    n1 = math.hypot(d1x, d1y)
    n2 = math.hypot(d2x, d2y)
    if n1 == 0.0 or n2 == 0.0:
        raise DegenerateGeometry("zero direction")
    cosv = abs(d1x * d2x + d1y * d2y) / (n1 * n2)
    return math.degrees(math.acos(min(1.0, cosv)))
