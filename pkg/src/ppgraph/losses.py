"""Binary cross entropy losses with hand-written gradients.

Sum-reduced BCE over a junction heatmap plus the same over an adjacency
matrix, combined with per-term weights. Pure numpy, no autograd; the
gradients are exact analytic expressions suitable for gradient checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CLAMP_EPS = 1e-7


@dataclass(frozen=True)
class LossWeights:
    lambda_junc: float = 1.0
    lambda_adj: float = 1.0

    def __post_init__(self):
        for v in (self.lambda_junc, self.lambda_adj):
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"weights must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class LossResult:
    total: float
    junc_term: float
    adj_term: float
    grad_junc: np.ndarray
    grad_adj: np.ndarray


def bce_sum(pred: np.ndarray, target: np.ndarray, mean: bool = False):
    """Sum-reduced binary cross entropy and its gradient w.r.t. pred.

    Predictions are clamped to [eps, 1-eps] before the logs; targets must be
    binary. Set ``mean=True`` for a mean-reduced variant (both loss and
    gradient are divided by the element count).
    """
    p = np.asarray(pred, dtype=float)
    t = np.asarray(target, dtype=float)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: pred {p.shape}, target {t.shape}")
    if not np.all((t == 0.0) | (t == 1.0)):
        raise ValueError("targets must be binary")
    pc = np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)
    loss = float(-np.sum(t * np.log(pc) + (1.0 - t) * np.log(1.0 - pc)))
    grad = -(t / pc) + (1.0 - t) / (1.0 - pc)
    # Clamped elements sit on a flat spot of the clamped objective.
    grad = np.where((p < CLAMP_EPS) | (p > 1.0 - CLAMP_EPS), 0.0, grad)
    if mean:
        n = p.size if p.size else 1
        return loss / n, grad / n
    return loss, grad


def total_loss(
    pred_heatmap: np.ndarray,
    gt_heatmap: np.ndarray,
    pred_adj: np.ndarray,
    gt_adj: np.ndarray,
    w: LossWeights = LossWeights(),
) -> LossResult:
    """Weighted sum of the heatmap and adjacency BCE terms."""
    ga = np.asarray(gt_adj, dtype=float)
    if ga.ndim == 2 and not np.array_equal(ga, ga.T):
        raise ValueError("adjacency target must be symmetric")
    junc, grad_junc = bce_sum(pred_heatmap, gt_heatmap)
    adj, grad_adj = bce_sum(pred_adj, gt_adj)
    return LossResult(
        total=w.lambda_junc * junc + w.lambda_adj * adj,
        junc_term=junc,
        adj_term=adj,
        grad_junc=w.lambda_junc * grad_junc,
        grad_adj=w.lambda_adj * grad_adj,
    )
