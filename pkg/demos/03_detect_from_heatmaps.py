"""End-to-end detection on a synthetic scene.

Pipeline: junction heatmap -> threshold + 8-neighbor maxima -> clustering NMS
-> bilinear strip sampling along every junction pair on the line heatmap ->
min-symmetrized confidences -> thresholded adjacency -> evaluation against
the ground-truth graph.
"""

import os

from ppgraph import (
    ExtractorConfig,
    SceneConfig,
    ScorerConfig,
    evaluate,
    extract,
    generate,
    graph_to_segments,
    make_heuristic_scorer,
    render_overlay,
    save_overlay,
    score_all_pairs,
    threshold_to_graph,
    truth_segments,
)

scene = generate(SceneConfig(seed=7, noise_amp=0.05, n_segments=6, allow_crossings=False))
print("truth:", scene.truth)

junctions = extract(scene.junction_map, ExtractorConfig(tau=0.25, epsilon=3.0))
print(f"extracted {len(junctions)} junctions")

cfg = ScorerConfig(samples=64, quantile=0.10, threshold=0.5)
scores = score_all_pairs(
    scene.line_map, junctions, cfg, make_heuristic_scorer(cfg.quantile),
    progress=lambda done, total: print(f"  scored tile {done}/{total}"),
)
pred = threshold_to_graph(scores, junctions, cfg.threshold, scene.truth.width, scene.truth.height)
print("detected:", pred)

report = evaluate(truth_segments(scene), graph_to_segments(pred), tol_frac=0.01)
print(f"precision={report.precision:.4f} recall={report.recall:.4f} f1={report.f1:.4f}")
print(f"({report.matches} matched pixels, tolerance {report.tolerance_px:.2f}px)")

out_dir = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(out_dir, exist_ok=True)
out_path = os.path.join(out_dir, "detection_overlay.png")
save_overlay(render_overlay(scene, pred), out_path)
print("overlay written to", out_path)
