"""Precision-recall behavior over the adjacency threshold sweep.

Sweeps the pair-confidence threshold over the standard list for a few
junction-heatmap thresholds tau and reports per-curve AUC. Lower thresholds
admit more edges (higher recall, lower precision); the curves are produced
by re-thresholding one score matrix per tau.
"""

from ppgraph import (
    ExtractorConfig,
    SceneConfig,
    ScorerConfig,
    extract,
    generate,
    make_heuristic_scorer,
    pr_curve,
    score_all_pairs,
    truth_segments,
)
from ppgraph.metrics import SWEEP_THRESHOLDS

scene = generate(SceneConfig(seed=21, noise_amp=0.10, n_segments=6))
gt = truth_segments(scene)
scorer_cfg = ScorerConfig()

for tau in (0.2, 0.25, 0.3):
    junctions = extract(scene.junction_map, ExtractorConfig(tau=tau))
    scores = score_all_pairs(
        scene.line_map, junctions, scorer_cfg, make_heuristic_scorer(scorer_cfg.quantile)
    )
    curve = pr_curve(gt, scores, junctions, list(SWEEP_THRESHOLDS), tol_frac=0.01)
    print(f"tau={tau:.2f}  ({len(junctions)} junctions)  auc={curve.auc:.4f}")
    for t, p, r in curve.points:
        print(f"  threshold {t:.2f}: precision={p:.3f} recall={r:.3f}")
