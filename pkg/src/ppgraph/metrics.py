"""Pixel-level precision/recall with localization tolerance.

Both the reference and the predicted segment sets are rasterized to
8-connected pixel traces; pixels are then matched one-to-one within a radius
of 0.01 x image diagonal (by default). Precision counts matched predicted
pixels, recall counts matched reference pixels.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .graph import SegmentSet

DEFAULT_TOLERANCE_FRAC = 0.01
SWEEP_THRESHOLDS = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7)


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    matches: int
    gt_pixels: int
    pred_pixels: int
    tolerance_px: float

    def to_json(self) -> str:
        return (
            f'{{"precision":{self.precision:.6f},"recall":{self.recall:.6f},'
            f'"f1":{self.f1:.6f},"matches":{self.matches},"gt_pixels":{self.gt_pixels},'
            f'"pred_pixels":{self.pred_pixels},"tolerance_px":{self.tolerance_px:.6f}}}'
        )


@dataclass(frozen=True)
class PRCurve:
    points: tuple[tuple[float, float, float], ...]  # (threshold, precision, recall)
    auc: float

    def to_json(self) -> str:
        pts = ",".join(f"[{t:.6f},{p:.6f},{r:.6f}]" for t, p, r in self.points)
        return f'{{"points":[{pts}],"auc":{self.auc:.6f}}}'


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def rasterize(s: SegmentSet) -> set[tuple[int, int]]:
    """8-connected pixel trace of every segment, deduplicated.

    Pixels come from rounding equidistant samples along the exact subpixel
    segment, so every emitted pixel lies within sqrt(2)/2 of the continuous
    segment. Out-of-frame pixels are clipped with a warning.
    """
    pixels: set[tuple[int, int]] = set()
    clipped = False
    for seg in s:
        ax, ay, bx, by = seg.a.x, seg.a.y, seg.b.x, seg.b.y
        n = max(1, math.ceil(max(abs(bx - ax), abs(by - ay))))
        for k in range(n + 1):
            t = k / n
            px = _round_half_up(ax + t * (bx - ax))
            py = _round_half_up(ay + t * (by - ay))
            if 0 <= px < s.width and 0 <= py < s.height:
                pixels.add((px, py))
            else:
                clipped = True
    if clipped:
        warnings.warn("segment pixels outside the frame were clipped")
    return pixels


def match_pixels(
    gt: set[tuple[int, int]], pred: set[tuple[int, int]], tol: float
) -> int:
    """One-to-one greedy matching count within radius tol.

    Candidate pairs are accepted in ascending distance; ties order by the
    smaller then larger pixel of the pair, which makes the count symmetric
    in the two arguments. Each pixel is used at most once.
    """
    if tol < 0:
        raise ValueError(f"tolerance must be >= 0, got {tol}")
    if not gt or not pred:
        return 0

    g = np.array(sorted(gt), dtype=float)
    q = np.array(sorted(pred), dtype=float)
    if len(g) * len(q) <= 4_000_000:
        d2_full = np.sum((g[:, None, :] - q[None, :, :]) ** 2, axis=-1)
        gi_arr, qi_arr = np.nonzero(d2_full <= tol * tol + 1e-9)
        d2 = d2_full[gi_arr, qi_arr]
    else:
        from scipy.spatial import cKDTree

        neighbors = cKDTree(q).query_ball_point(g, r=tol + 1e-9)
        gi_list: list[int] = []
        qi_list: list[int] = []
        for gi, hits in enumerate(neighbors):
            for qi in hits:
                gi_list.append(gi)
                qi_list.append(qi)
        gi_arr = np.array(gi_list, dtype=int)
        qi_arr = np.array(qi_list, dtype=int)
        if len(gi_arr):
            d2 = np.sum((g[gi_arr] - q[qi_arr]) ** 2, axis=1)
            keep = d2 <= tol * tol + 1e-9
            gi_arr, qi_arr, d2 = gi_arr[keep], qi_arr[keep], d2[keep]
        else:
            d2 = np.zeros(0)
    if len(d2) == 0:
        return 0

    gp = g[gi_arr]
    qp = q[qi_arr]
    lo = np.minimum(gp, qp)
    hi = np.maximum(gp, qp)
    # Role-agnostic ordering: distance, then the smaller pixel, then the larger.
    order = np.lexsort((hi[:, 1], hi[:, 0], lo[:, 1], lo[:, 0], d2))

    g_used = np.zeros(len(g), dtype=bool)
    q_used = np.zeros(len(q), dtype=bool)
    matches = 0
    limit = min(len(g), len(q))
    for idx in order.tolist():
        a = gi_arr[idx]
        b = qi_arr[idx]
        if g_used[a] or q_used[b]:
            continue
        g_used[a] = True
        q_used[b] = True
        matches += 1
        if matches == limit:
            break
    return matches


def evaluate(
    gt: SegmentSet, pred: SegmentSet, tol_frac: float = DEFAULT_TOLERANCE_FRAC
) -> EvalReport:
    """Precision/recall/F1 of predicted segments against a reference set.

    The matching radius is ``tol_frac`` of the image diagonal. An empty
    reference set leaves recall undefined and is rejected; an empty
    prediction has precision 1 by convention (no false positives).
    """
    if (gt.width, gt.height) != (pred.width, pred.height):
        raise ValueError(
            f"frame mismatch: {gt.width}x{gt.height} vs {pred.width}x{pred.height}"
        )
    if len(gt) == 0:
        raise ValueError("empty reference set: recall is undefined")
    tol = tol_frac * math.hypot(gt.width, gt.height)
    g = rasterize(gt)
    q = rasterize(pred)
    m = match_pixels(g, q, tol)
    precision = 1.0 if len(q) == 0 else m / len(q)
    recall = m / len(g)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        matches=m,
        gt_pixels=len(g),
        pred_pixels=len(q),
        tolerance_px=tol,
    )


def combine_reports(reports: list[EvalReport], mode: str = "micro") -> EvalReport:
    """Aggregate per-image reports.

    micro: sum the counts, recompute the ratios. macro: average the ratios.
    """
    if not reports:
        raise ValueError("nothing to combine")
    if mode == "micro":
        m = sum(r.matches for r in reports)
        gp = sum(r.gt_pixels for r in reports)
        qp = sum(r.pred_pixels for r in reports)
        precision = 1.0 if qp == 0 else m / qp
        recall = m / gp
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        tol = reports[0].tolerance_px
        return EvalReport(precision, recall, f1, m, gp, qp, tol)
    if mode == "macro":
        precision = sum(r.precision for r in reports) / len(reports)
        recall = sum(r.recall for r in reports) / len(reports)
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        return EvalReport(
            precision,
            recall,
            f1,
            sum(r.matches for r in reports),
            sum(r.gt_pixels for r in reports),
            sum(r.pred_pixels for r in reports),
            reports[0].tolerance_px,
        )
    raise ValueError(f"unknown combine mode {mode!r}")


def trapezoid_auc(points: list[tuple[float, float]]) -> float:
    """Area under precision(recall) by the trapezoidal rule.

    Points are (recall, precision); integration covers the observed recall
    span only, with no extrapolation toward recall 0 or 1.
    """
    pts = sorted(points)
    area = 0.0
    for (r0, p0), (r1, p1) in zip(pts, pts[1:]):
        area += 0.5 * (p0 + p1) * (r1 - r0)
    return area


def pr_curve(
    gt: SegmentSet,
    scores,
    junctions,
    thresholds,
    tol_frac: float = DEFAULT_TOLERANCE_FRAC,
    collinear_tol: float = 2.0,
) -> PRCurve:
    """Evaluate a score matrix at a sweep of adjacency thresholds.

    For each threshold the matrix is binarized into a graph, converted to
    maximal segments, and evaluated against ``gt``.
    """
    from .graph import graph_to_segments
    from .scoring import threshold_to_graph

    thresholds = list(thresholds)
    if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be strictly increasing")
    pts = []
    for t in thresholds:
        graph = threshold_to_graph(scores, junctions, t, gt.width, gt.height)
        segs = graph_to_segments(graph, collinear_tol)
        report = evaluate(gt, segs, tol_frac)
        pts.append((t, report.precision, report.recall))
    auc = trapezoid_auc([(r, p) for _, p, r in pts])
    return PRCurve(points=tuple(pts), auc=auc)
