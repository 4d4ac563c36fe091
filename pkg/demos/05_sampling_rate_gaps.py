"""Why the sampling rate matters: gaps between collinear segments.

With only the two endpoint probes (L=2), a broken segment looks identical to
a solid one, so the pair is wrongly connected. At L=64 enough probes land in
the dark band: its low quantile collapses to zero and the pair is rejected.
"""

import numpy as np

from ppgraph import (
    ExtractorConfig,
    SceneConfig,
    ScorerConfig,
    extract,
    generate,
    lsam_sample,
    make_heuristic_scorer,
    score_all_pairs,
    threshold_to_graph,
)

scene = generate(
    SceneConfig(seed=5, noise_amp=0.05, gap_prob=1.0, n_segments=4, allow_crossings=False)
)
print(f"{len(scene.gaps)} gapped segments")

junctions = extract(scene.junction_map, ExtractorConfig())
index = {(j.x, j.y): k for k, j in enumerate(junctions)}

for samples in (64, 2):
    cfg = ScorerConfig(samples=samples, threshold=0.5)
    scores = score_all_pairs(
        scene.line_map, junctions, cfg, make_heuristic_scorer(cfg.quantile)
    )
    pred = threshold_to_graph(scores, junctions, 0.5, scene.truth.width, scene.truth.height)
    print(f"\nL={samples}: {pred.edge_count()} edges")
    for band in scene.gaps:
        ia = index.get(band.a)
        ib = index.get(band.b)
        if ia is None or ib is None:
            continue
        bridged = bool(pred.adjacency[ia, ib])
        strip = lsam_sample(scene.line_map, junctions[ia], junctions[ib], samples)
        q = float(np.quantile(strip.values[0], cfg.quantile, method="lower"))
        print(
            f"  gapped pair {band.a} -> {band.b}: "
            f"low quantile {q:.3f} -> {'BRIDGED (wrong)' if bridged else 'rejected'}"
        )
