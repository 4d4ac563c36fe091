import math

import numpy as np
import pytest

from ppgraph import (
    Junction,
    ScoreMatrix,
    Segment,
    SegmentSet,
    combine_reports,
    evaluate,
    match_pixels,
    pr_curve,
    rasterize,
)
from ppgraph.metrics import SWEEP_THRESHOLDS, trapezoid_auc

from conftest import rng_for


def seg_set(width, height, pairs):
    s = SegmentSet(width, height)
    for (ax, ay), (bx, by) in pairs:
        s.add(Segment(Junction(ax, ay), Junction(bx, by)))
    return s


def point_segment_dist(p, a, b):
    vx, vy = b[0] - a[0], b[1] - a[1]
    L2 = vx * vx + vy * vy
    t = min(1.0, max(0.0, ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / L2))
    return math.hypot(p[0] - a[0] - t * vx, p[1] - a[1] - t * vy)


class TestRasterize:
    def test_horizontal_count(self):
        s = seg_set(128, 16, [((0, 0), (100, 0))])
        assert len(rasterize(s)) == 101

    def test_diagonal_count(self):
        s = seg_set(128, 128, [((0, 0), (100, 100))])
        assert len(rasterize(s)) == 101

    def test_pixels_near_continuous_segment(self):
        rng = rng_for(19)
        for _ in range(50):
            a = tuple(rng.uniform(2, 120, size=2))
            b = tuple(rng.uniform(2, 120, size=2))
            if math.hypot(b[0] - a[0], b[1] - a[1]) < 1:
                continue
            s = seg_set(128, 128, [(a, b)])
            for p in rasterize(s):
                assert point_segment_dist(p, a, b) <= 0.71

    def test_eight_connected(self):
        rng = rng_for(23)
        for _ in range(20):
            a = tuple(rng.uniform(2, 120, size=2))
            b = tuple(rng.uniform(2, 120, size=2))
            if math.hypot(b[0] - a[0], b[1] - a[1]) < 2:
                continue
            pixels = rasterize(seg_set(128, 128, [(a, b)]))
            # Every pixel except the two rounded endpoints has an 8-neighbor.
            for p in pixels:
                if len(pixels) == 1:
                    break
                assert any(
                    q != p and max(abs(q[0] - p[0]), abs(q[1] - p[1])) == 1
                    for q in pixels
                )

    def test_out_of_frame_clipped_with_warning(self):
        s = seg_set(32, 32, [((-5, 10), (40, 10))])
        with pytest.warns(UserWarning):
            pixels = rasterize(s)
        assert all(0 <= x < 32 and 0 <= y < 32 for x, y in pixels)

    def test_union_deduplicates(self):
        s = seg_set(64, 64, [((0, 0), (20, 0)), ((0, 0), (20, 0))])
        assert len(rasterize(s)) == 21


class TestMatchPixels:
    def test_identical_sets(self):
        px = {(i, 2 * i % 7) for i in range(40)}
        assert match_pixels(px, set(px), tol=3.0) == 40

    def test_disjoint_far_sets(self):
        a = {(0, 0), (1, 0)}
        b = {(50, 50), (51, 50)}
        assert match_pixels(a, b, tol=5.0) == 0

    def test_parallel_lines_fully_matched(self):
        gt = {(x, 0) for x in range(101)}
        pred = {(x, 2) for x in range(101)}
        got = match_pixels(gt, pred, tol=5.0)
        # Oracle: maximum bipartite matching on the tolerance graph.
        from scipy.sparse import csr_matrix
        from scipy.sparse.csgraph import maximum_bipartite_matching

        g = sorted(gt)
        q = sorted(pred)
        rows, cols = [], []
        for i, p in enumerate(g):
            for j, r in enumerate(q):
                if math.hypot(p[0] - r[0], p[1] - r[1]) <= 5.0:
                    rows.append(i)
                    cols.append(j)
        m = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(g), len(q)))
        perfect = int((maximum_bipartite_matching(m, perm_type="column") >= 0).sum())
        assert perfect == 101
        assert got == 101

    def test_symmetric_counts(self):
        rng = rng_for(37)
        for _ in range(30):
            a = {tuple(map(int, p)) for p in rng.integers(0, 30, size=(40, 2))}
            b = {tuple(map(int, p)) for p in rng.integers(0, 30, size=(40, 2))}
            assert match_pixels(a, b, 4.0) == match_pixels(b, a, 4.0)

    def test_monotone_in_tolerance(self):
        rng = rng_for(43)
        a = {tuple(map(int, p)) for p in rng.integers(0, 40, size=(60, 2))}
        b = {tuple(map(int, p)) for p in rng.integers(0, 40, size=(60, 2))}
        counts = [match_pixels(a, b, t) for t in (0.0, 1.0, 2.0, 4.0, 8.0, 16.0)]
        assert counts == sorted(counts)

    def test_one_to_one(self):
        # A single predicted pixel cannot cover several reference pixels.
        gt = {(0, 0), (1, 0), (2, 0)}
        pred = {(1, 1)}
        assert match_pixels(gt, pred, tol=3.0) == 1


class TestEvaluate:
    def test_perfect_prediction(self):
        s = seg_set(128, 128, [((3, 4), (90, 4)), ((10, 20), (10, 100))])
        rep = evaluate(s, s, 0.01)
        assert rep.precision == 1.0 and rep.recall == 1.0 and rep.f1 == 1.0
        assert rep.matches == rep.gt_pixels == rep.pred_pixels

    def test_half_prefix_recall(self):
        gt = seg_set(128, 16, [((0, 4), (100, 4))])
        pred = seg_set(128, 16, [((0, 4), (50, 4))])
        rep = evaluate(gt, pred, 0.01)
        assert rep.precision == 1.0
        assert rep.recall == pytest.approx(51 / 101)
        assert rep.matches == 51 and rep.gt_pixels == 101 and rep.pred_pixels == 51

    def test_dropped_half_of_segments(self):
        pairs = [((0, 10), (120, 10)), ((0, 40), (120, 40)),
                 ((0, 70), (120, 70)), ((0, 100), (120, 100))]
        gt = seg_set(128, 128, pairs)
        pred = seg_set(128, 128, pairs[:2])
        rep = evaluate(gt, pred, 0.01)
        assert rep.precision == 1.0
        exact = rep.matches / rep.gt_pixels
        assert rep.recall == exact
        assert rep.recall == pytest.approx(0.5, abs=0.02)

    def test_identities(self):
        rng = rng_for(47)
        for _ in range(20):
            gt = seg_set(
                128, 128,
                [(tuple(rng.uniform(5, 120, 2)), tuple(rng.uniform(5, 120, 2)))
                 for _ in range(3)],
            )
            pred = seg_set(
                128, 128,
                [(tuple(rng.uniform(5, 120, 2)), tuple(rng.uniform(5, 120, 2)))
                 for _ in range(3)],
            )
            rep = evaluate(gt, pred, 0.01)
            assert rep.precision * rep.pred_pixels == pytest.approx(rep.matches, abs=1e-9)
            assert rep.recall * rep.gt_pixels == pytest.approx(rep.matches, abs=1e-9)

    def test_tolerance_scales_with_diagonal(self):
        gt = seg_set(100, 100, [((0, 0), (50, 50))])
        rep = evaluate(gt, gt, 0.01)
        assert rep.tolerance_px == pytest.approx(0.01 * math.hypot(100, 100))

    def test_scale_invariance(self):
        base = [((5.0, 10.0), (100.0, 15.0)), ((20.0, 5.0), (30.0, 110.0))]
        pred = [((6.0, 11.0), (99.0, 16.0)), ((21.0, 7.0), (29.0, 108.0))]
        r1 = evaluate(seg_set(128, 128, base), seg_set(128, 128, pred), 0.01)
        base2 = [((2 * ax, 2 * ay), (2 * bx, 2 * by)) for (ax, ay), (bx, by) in base]
        pred2 = [((2 * ax, 2 * ay), (2 * bx, 2 * by)) for (ax, ay), (bx, by) in pred]
        r2 = evaluate(seg_set(256, 256, base2), seg_set(256, 256, pred2), 0.01)
        assert r2.precision == pytest.approx(r1.precision, abs=0.02)
        assert r2.recall == pytest.approx(r1.recall, abs=0.02)

    def test_empty_reference_rejected(self):
        gt = SegmentSet(64, 64)
        pred = seg_set(64, 64, [((0, 0), (10, 10))])
        with pytest.raises(ValueError):
            evaluate(gt, pred, 0.01)

    def test_empty_prediction_precision_one(self):
        gt = seg_set(64, 64, [((0, 0), (10, 10))])
        rep = evaluate(gt, SegmentSet(64, 64), 0.01)
        assert rep.precision == 1.0 and rep.recall == 0.0 and rep.f1 == 0.0

    def test_frame_mismatch_rejected(self):
        gt = seg_set(64, 64, [((0, 0), (10, 10))])
        pred = seg_set(32, 64, [((0, 0), (10, 10))])
        with pytest.raises(ValueError):
            evaluate(gt, pred, 0.01)

    def test_report_json_format(self):
        s = seg_set(64, 64, [((0, 0), (20, 0))])
        text = evaluate(s, s, 0.01).to_json()
        assert text.startswith('{"precision":1.000000,"recall":1.000000,"f1":1.000000,')
        assert '"matches":21' in text


class TestCombine:
    def test_micro_sums_counts(self):
        a = seg_set(64, 64, [((0, 0), (40, 0))])
        b = seg_set(64, 64, [((0, 10), (20, 10))])
        r1 = evaluate(a, a, 0.01)
        r2 = evaluate(b, SegmentSet(64, 64), 0.01)
        micro = combine_reports([r1, r2], "micro")
        assert micro.matches == r1.matches
        assert micro.gt_pixels == r1.gt_pixels + r2.gt_pixels
        assert micro.recall == pytest.approx(r1.matches / micro.gt_pixels)

    def test_macro_averages(self):
        a = seg_set(64, 64, [((0, 0), (40, 0))])
        r1 = evaluate(a, a, 0.01)
        r2 = evaluate(a, SegmentSet(64, 64), 0.01)
        macro = combine_reports([r1, r2], "macro")
        assert macro.recall == pytest.approx(0.5)


class TestPrCurve:
    def _setup(self):
        gt = seg_set(64, 64, [((4, 20), (60, 20))])
        juncs = [Junction(4, 20), Junction(60, 20), Junction(30, 50)]
        m = np.zeros((3, 3))
        m[0, 1] = m[1, 0] = 0.9
        m[0, 2] = m[2, 0] = 0.2
        return gt, juncs, ScoreMatrix(m)

    def test_single_threshold_degenerate_auc(self):
        gt, juncs, scores = self._setup()
        curve = pr_curve(gt, scores, juncs, [0.5], 0.01)
        assert len(curve.points) == 1
        assert curve.auc == 0.0

    def test_perfect_detector_flat_curve(self):
        gt, juncs, scores = self._setup()
        curve = pr_curve(gt, scores, juncs, [0.3, 0.5, 0.7], 0.01)
        for _, p, r in curve.points:
            assert (p, r) == (1.0, 1.0)
        assert curve.auc == 0.0  # zero observed recall span

    def test_auc_matches_numeric_oracle(self):
        gt, juncs, scores = self._setup()
        thresholds = list(SWEEP_THRESHOLDS)
        curve = pr_curve(gt, scores, juncs, thresholds, 0.01)
        pts = sorted((r, p) for _, p, r in curve.points)
        want = float(np.trapezoid([p for _, p in pts], [r for r, _ in pts]))
        assert curve.auc == pytest.approx(want, abs=1e-12)

    def test_thresholds_must_increase(self):
        gt, juncs, scores = self._setup()
        with pytest.raises(ValueError):
            pr_curve(gt, scores, juncs, [0.5, 0.5], 0.01)

    def test_json_layout(self):
        gt, juncs, scores = self._setup()
        curve = pr_curve(gt, scores, juncs, [0.5], 0.01)
        assert curve.to_json() == '{"points":[[0.500000,1.000000,1.000000]],"auc":0.000000}'


def test_trapezoid_helper():
    assert trapezoid_auc([(0.0, 1.0), (1.0, 1.0)]) == 1.0
    assert trapezoid_auc([(0.2, 0.8)]) == 0.0
    assert trapezoid_auc([(0.0, 0.0), (1.0, 1.0)]) == pytest.approx(0.5)
