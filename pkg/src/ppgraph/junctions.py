"""Junction extraction from a heatmap.

Three stages: response thresholding with 8-neighbor local-maximum filtering,
single-linkage clustering NMS at a pixel cutoff, and a highest-response cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import PlanarField
from .graph import Junction


@dataclass(frozen=True)
class ExtractorConfig:
    tau: float = 0.25
    epsilon: float = 3.0
    max_junctions: int = 512
    plateau_mode: str = "strict"

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError(f"tau must be in (0, 1), got {self.tau}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_junctions < 1:
            raise ValueError(f"max_junctions must be >= 1, got {self.max_junctions}")
        if self.plateau_mode not in ("strict", "ge"):
            raise ValueError(f"plateau_mode must be 'strict' or 'ge', got {self.plateau_mode!r}")


def local_maxima(h: PlanarField, cfg: ExtractorConfig) -> list[tuple[float, float, float]]:
    """Cells above tau that dominate their 8 neighbors, in image coordinates.

    'strict' mode requires the response to exceed every neighbor; 'ge' accepts
    plateau cells that are merely not exceeded. Border cells compare against
    existing neighbors only. Returns (x, y, response) triples sorted by (y, x).
    """
    if not h.is_heatmap():
        raise ValueError(
            f"local_maxima needs a single-channel [0, 1] heatmap, got C={h.channels} "
            f"with values in [{h.values.min():.3g}, {h.values.max():.3g}]"
        )
    grid = h.values[0]
    padded = np.pad(grid, 1, mode="constant", constant_values=-np.inf)
    neighborhood = np.full(grid.shape, -np.inf)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            shifted = padded[1 + di : 1 + di + grid.shape[0], 1 + dj : 1 + dj + grid.shape[1]]
            neighborhood = np.maximum(neighborhood, shifted)
    if cfg.plateau_mode == "strict":
        mask = (grid > cfg.tau) & (grid > neighborhood)
    else:
        mask = (grid > cfg.tau) & (grid >= neighborhood)
    rows, cols = np.nonzero(mask)
    out = [
        (float(c * h.stride), float(r * h.stride), float(grid[r, c]))
        for r, c in zip(rows.tolist(), cols.tolist())
    ]
    out.sort(key=lambda t: (t[1], t[0]))
    return out


def _cutoff_cluster_labels(coords: np.ndarray, eps: float) -> list[int]:
    """Single-linkage flat clusters at a distance cutoff.

    Clusters merge while the minimum inter-cluster distance is <= eps, which
    is exactly the connected components of the <=eps proximity graph; a
    spatial hash keeps the neighbor search near-linear.
    """
    n = len(coords)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    cells = np.floor(coords / eps).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, (cx, cy) in enumerate(cells.tolist()):
        buckets.setdefault((cx, cy), []).append(i)
    eps2 = eps * eps
    for i, (cx, cy) in enumerate(cells.tolist()):
        xi, yi = coords[i]
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in buckets.get((cx + dx, cy + dy), ()):
                    if j >= i:
                        continue
                    ddx = xi - coords[j, 0]
                    ddy = yi - coords[j, 1]
                    if ddx * ddx + ddy * ddy <= eps2:
                        ri, rj = find(i), find(j)
                        if ri != rj:
                            parent[max(ri, rj)] = min(ri, rj)
    return [find(i) for i in range(n)]


def cluster_nms(
    points: list[tuple[float, float, float]], cfg: ExtractorConfig
) -> list[Junction]:
    """One representative per single-linkage cluster at cutoff epsilon.

    The representative is the member with the highest response; ties go to
    the smaller (y, x). Output sorted ascending by (y, x).
    """
    if not points:
        return []
    coords = np.array([(x, y) for x, y, _ in points], dtype=float)
    labels = _cutoff_cluster_labels(coords, cfg.epsilon)

    best: dict[int, tuple] = {}
    for (x, y, r), lab in zip(points, labels):
        key = (-r, y, x)
        if lab not in best or key < best[lab]:
            best[lab] = key
    reps = [Junction(x, y) for _, y, x in best.values()]
    reps.sort(key=lambda j: (j.y, j.x))
    return reps


def extract(h: PlanarField, cfg: ExtractorConfig) -> list[Junction]:
    """Full pipeline: local maxima, clustering NMS, highest-response cap."""
    points = local_maxima(h, cfg)
    reps = cluster_nms(points, cfg)
    if len(reps) > cfg.max_junctions:
        response = {(x, y): r for x, y, r in points}
        reps.sort(key=lambda j: (-response[(j.x, j.y)], j.y, j.x))
        reps = reps[: cfg.max_junctions]
        reps.sort(key=lambda j: (j.y, j.x))
    return reps
