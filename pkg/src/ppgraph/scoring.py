"""Line-aligned feature sampling and pair-connectivity scoring.

A candidate segment between two junctions is sampled as L equidistant
bilinear probes of a field. A scorer turns the resulting strip into a
confidence; both junction orders are scored and combined with min, which
acts as an 'and' over the two directions. Thresholding the resulting
symmetric score matrix yields a line graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .fields import PlanarField
from .graph import Junction, LineGraph, build_graph


@dataclass(frozen=True)
class ScorerConfig:
    samples: int = 64
    quantile: float = 0.10
    threshold: float = 0.25
    block: int = 64

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError(f"samples must be >= 2, got {self.samples}")
        if not (0.0 <= self.quantile <= 1.0):
            raise ValueError(f"quantile must be in [0, 1], got {self.quantile}")
        if not (0.0 < self.threshold < 1.0):
            raise ValueError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.block < 1:
            raise ValueError(f"block must be >= 1, got {self.block}")


class FeatureStrip:
    """C x L matrix of field samples ordered from the first to the second junction."""

    def __init__(self, values: np.ndarray):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise ValueError(f"expected CxL with L >= 2, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite strip values")
        self.values = arr

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


class ScoreMatrix:
    """K x K pair confidences, symmetric with a zero diagonal."""

    def __init__(self, values: np.ndarray):
        m = np.asarray(values, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected square matrix, got {m.shape}")
        if m.size and (m.min() < 0.0 or m.max() > 1.0):
            raise ValueError("scores outside [0, 1]")
        if not np.array_equal(m, m.T):
            raise ValueError("score matrix not symmetric")
        if m.size and np.any(np.diag(m) != 0.0):
            raise ValueError("score matrix diagonal not zero")
        self.values = m
        self.values.setflags(write=False)

    @property
    def size(self) -> int:
        return self.values.shape[0]


PairScorer = Callable[[FeatureStrip], float]


class PairScoringError(RuntimeError):
    """Scorer failed on a specific junction pair."""

    def __init__(self, i: int, j: int, cause: Exception):
        super().__init__(f"scorer failed on pair ({i}, {j}): {cause}")
        self.pair = (i, j)


def bilinear_sample(field: PlanarField, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Bilinear probe of all channels at grid coordinates (gx, gy).

    Coordinates outside the grid are clamped to the border, which keeps the
    interpolant continuous. Returns C x N.
    """
    v = field.values
    h, w = field.grid_height, field.grid_width
    x = np.clip(np.asarray(gx, dtype=float), 0.0, w - 1.0)
    y = np.clip(np.asarray(gy, dtype=float), 0.0, h - 1.0)
    x0 = np.clip(np.floor(x).astype(int), 0, w - 1)
    y0 = np.clip(np.floor(y).astype(int), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = v[:, y0, x0] * (1.0 - fx) + v[:, y0, x1] * fx
    bot = v[:, y1, x0] * (1.0 - fx) + v[:, y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def lsam_sample(field: PlanarField, a: Junction, b: Junction, samples: int = 64) -> FeatureStrip:
    """Equidistant bilinear samples along the straight path from a to b.

    Probe k sits at a + k/(L-1) * (b - a) for k = 0..L-1, so both endpoints
    are included; image coordinates are divided by the field stride before
    interpolation.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if a.x == b.x and a.y == b.y:
        raise ValueError("cannot sample a zero-length pair")
    k = np.arange(samples, dtype=float)
    w1 = k / (samples - 1)
    w0 = (samples - 1 - k) / (samples - 1)
    # Two-sided weights make order reversal reproduce the same probe
    # coordinates bit-for-bit (w0 of probe k equals w1 of probe L-1-k).
    xs = (a.x * w0 + b.x * w1) / field.stride
    ys = (a.y * w0 + b.y * w1) / field.stride
    return FeatureStrip(bilinear_sample(field, xs, ys))


def symmetrize(conf_ab: float, conf_ba: float) -> float:
    """Order-independent pair confidence: the lower of the two directions."""
    for v in (conf_ab, conf_ba):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"confidence {v} outside [0, 1]")
    return min(conf_ab, conf_ba)


def heuristic_score(strip: FeatureStrip, quantile: float = 0.10) -> float:
    """Low quantile of a line-heatmap strip.

    Any sustained gap along the candidate drags the low quantile to the gap
    value, so broken collinear pairs score near zero while a solid segment
    scores near its heatmap intensity.
    """
    if strip.channels != 1:
        raise ValueError(f"heuristic scorer needs a C=1 strip, got C={strip.channels}")
    return float(np.quantile(strip.values[0], quantile, method="lower"))


def make_heuristic_scorer(quantile: float = 0.10) -> PairScorer:
    def scorer(strip: FeatureStrip) -> float:
        return heuristic_score(strip, quantile)

    return scorer


def score_all_pairs(
    field: PlanarField,
    junctions: Sequence[Junction],
    cfg: ScorerConfig,
    scorer: PairScorer,
    progress: Callable[[int, int], None] | None = None,
) -> ScoreMatrix:
    """Symmetrized confidences for every unordered junction pair.

    Work is tiled into block x block chunks of the matrix; tiling only
    affects progress reporting, never the values. ``progress`` receives
    (done_tiles, total_tiles) after each tile.
    """
    k = len(junctions)
    if k < 2:
        raise ValueError(f"need at least 2 junctions, got {k}")
    out = np.zeros((k, k), dtype=float)
    nb = (k + cfg.block - 1) // cfg.block
    tiles = [(bi, bj) for bi in range(nb) for bj in range(bi, nb)]
    for done, (bi, bj) in enumerate(tiles, start=1):
        for i in range(bi * cfg.block, min((bi + 1) * cfg.block, k)):
            j_lo = max(i + 1, bj * cfg.block)
            for j in range(j_lo, min((bj + 1) * cfg.block, k)):
                try:
                    fwd = scorer(lsam_sample(field, junctions[i], junctions[j], cfg.samples))
                    rev = scorer(lsam_sample(field, junctions[j], junctions[i], cfg.samples))
                except Exception as e:
                    raise PairScoringError(i, j, e) from e
                out[i, j] = out[j, i] = symmetrize(fwd, rev)
        if progress is not None:
            progress(done, len(tiles))
    return ScoreMatrix(out)


def threshold_to_graph(
    scores: ScoreMatrix,
    junctions: Sequence[Junction],
    threshold: float,
    width: int,
    height: int,
) -> LineGraph:
    """Boolean adjacency A_ij = [score_ij >= threshold] as a LineGraph."""
    k = scores.size
    if k != len(junctions):
        raise ValueError(f"matrix size {k} != junction count {len(junctions)}")
    edges = [
        (i, j)
        for i in range(k)
        for j in range(i + 1, k)
        if scores.values[i, j] >= threshold
    ]
    return build_graph(width, height, [(j.x, j.y) for j in junctions], edges)
