"""Training losses: sum-reduced BCE over heatmap and adjacency targets.

The analytic gradients are exact; the finite-difference probe below is the
same check the test suite runs at scale.
"""

import numpy as np

from ppgraph import LossWeights, SceneConfig, bce_sum, generate, total_loss

rng = np.random.Generator(np.random.PCG64(3))

scene = generate(SceneConfig(seed=3, n_segments=4))
gt_heat = (scene.junction_map.values[0] > 0.5).astype(float)
gt_adj = scene.truth.adjacency.astype(float)

pred_heat = np.clip(gt_heat * 0.8 + rng.uniform(0, 0.15, gt_heat.shape), 0.01, 0.99)
pred_adj = np.clip(gt_adj * 0.7 + rng.uniform(0, 0.2, gt_adj.shape), 0.01, 0.99)
pred_adj = np.minimum(pred_adj, pred_adj.T)

res = total_loss(pred_heat, gt_heat, pred_adj, gt_adj, LossWeights(1.0, 1.0))
print(f"junction term: {res.junc_term:.3f}")
print(f"adjacency term: {res.adj_term:.3f}")
print(f"total (unit weights): {res.total:.3f}")

# Spot-check one gradient entry against central differences.
i, j = 3, 5
step = 1e-5
_, grad = bce_sum(pred_heat, gt_heat)
bumped = pred_heat.copy()
bumped[i, j] += step
hi, _ = bce_sum(bumped, gt_heat)
bumped[i, j] -= 2 * step
lo, _ = bce_sum(bumped, gt_heat)
fd = (hi - lo) / (2 * step)
print(f"\nd loss / d pred[{i},{j}]: analytic {grad[i, j]:.6f}, finite diff {fd:.6f}")
