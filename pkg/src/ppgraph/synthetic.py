"""Synthetic scene generation for end-to-end pipeline verification.

A scene is a randomly placed set of line segments, canonicalized into a truth
graph (crossings become junctions), plus rendered junction and line heatmaps.
Everything is a pure function of the config, seeded through a named portable
generator (numpy PCG64), so scenes are bit-reproducible.

Segment endpoints are sampled on the heatmap cell lattice so that truth
junctions align with grid cells, and placement enforces clearance rules
(pairwise direction angles, segment separation, junction separation, crossing
clearance) that keep scenes unambiguous for the detection heuristics; without
them, random layouts routinely contain near-collinear pairs with small gaps,
which no endpoint-pair scorer can resolve.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .canonicalize import CanonConfig, RawAnnotation, canonicalize
from .fields import PlanarField, save_field
from .geometry import direction_angle_deg, point_segment_distance, segment_intersection
from .graph import LineGraph, Segment, SegmentSet, graph_to_segments, save_graph


class GenerationError(RuntimeError):
    """Scene constraints could not be satisfied within the retry budget."""


@dataclass(frozen=True)
class SceneConfig:
    width: int = 256
    height: int = 256
    n_segments: int = 6
    min_len_frac: float = 0.10
    max_len_frac: float = 0.35
    junction_sigma: float = 4.0
    line_sigma: float = 3.0
    noise_amp: float = 0.0
    seed: int = 0
    gap_prob: float = 0.0
    stride: float = 4.0
    # Placement clearances; see module docstring.
    min_junction_sep: float = 12.0
    clear_dist: float = 12.0
    min_pair_angle_deg: float = 15.0
    allow_crossings: bool = True

    def __post_init__(self):
        if self.min_len_frac <= 0 or self.max_len_frac <= self.min_len_frac:
            raise ValueError("need 0 < min_len_frac < max_len_frac")
        if self.junction_sigma <= 0 or self.line_sigma <= 0:
            raise ValueError("sigmas must be positive")
        for p in (self.noise_amp, self.gap_prob):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability/amplitude {p} outside [0, 1]")
        if self.stride <= 0:
            raise ValueError("stride must be positive")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


@dataclass(frozen=True)
class GapBand:
    """Zeroed stretch of a rendered segment, in arc length from endpoint a."""

    segment: int
    a: tuple[float, float]
    b: tuple[float, float]
    t0: float
    t1: float


@dataclass
class SyntheticScene:
    truth: LineGraph
    junction_map: PlanarField
    line_map: PlanarField
    config: SceneConfig
    base_segments: list[tuple[tuple[float, float], tuple[float, float]]] = field(
        default_factory=list
    )
    gaps: list[GapBand] = field(default_factory=list)


def _lattice_candidates(cfg: SceneConfig, margin: float) -> tuple[np.ndarray, np.ndarray]:
    s = cfg.stride
    xs = np.arange(math.ceil(margin / s), math.floor((cfg.width - 1 - margin) / s) + 1) * s
    ys = np.arange(math.ceil(margin / s), math.floor((cfg.height - 1 - margin) / s) + 1) * s
    if len(xs) < 2 or len(ys) < 2:
        raise GenerationError("frame too small for the configured margins")
    return xs, ys


def _min_seg_distance(a1, a2, b1, b2) -> float:
    return min(
        point_segment_distance(a1, b1, b2),
        point_segment_distance(a2, b1, b2),
        point_segment_distance(b1, a1, a2),
        point_segment_distance(b2, a1, a2),
    )


# Collinear shadow slab around a segment: another junction inside it would let
# a straight probe ride this segment's bright tube for most of its length (the
# near-collinear small-gap ambiguity no endpoint-pair scorer can resolve).
_SHADOW_HALFWIDTH = 8.0
_SHADOW_EXTENSION = 48.0


def _in_shadow(u, e1, e2) -> bool:
    dx, dy = e2[0] - e1[0], e2[1] - e1[1]
    length = math.hypot(dx, dy)
    t = ((u[0] - e1[0]) * dx + (u[1] - e1[1]) * dy) / length
    perp = abs((u[0] - e1[0]) * dy - (u[1] - e1[1]) * dx) / length
    return perp <= _SHADOW_HALFWIDTH and -_SHADOW_EXTENSION <= t <= length + _SHADOW_EXTENSION


def _try_place(rng, cfg: SceneConfig, xs, ys, segs, crossings):
    a = (float(rng.choice(xs)), float(rng.choice(ys)))
    b = (float(rng.choice(xs)), float(rng.choice(ys)))
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    if not (cfg.min_len_frac * cfg.diagonal <= length <= cfg.max_len_frac * cfg.diagonal):
        return None
    new_crossings = []
    for (e1, e2) in segs:
        ang = direction_angle_deg(b[0] - a[0], b[1] - a[1], e2[0] - e1[0], e2[1] - e1[1])
        if ang < cfg.min_pair_angle_deg:
            return None
        inter = segment_intersection(a, b, e1, e2)
        if inter is not None:
            if not cfg.allow_crossings:
                return None
            for p in (a, b, e1, e2):
                if math.hypot(inter[0] - p[0], inter[1] - p[1]) < cfg.clear_dist:
                    return None
            new_crossings.append(inter)
        else:
            if _min_seg_distance(a, b, e1, e2) < cfg.clear_dist:
                return None
            if any(_in_shadow(u, e1, e2) for u in (a, b)):
                return None
            if any(_in_shadow(u, a, b) for u in (e1, e2)):
                return None
    points = [p for s in segs for p in s] + crossings
    for p in points:
        for q in (a, b):
            if math.hypot(p[0] - q[0], p[1] - q[1]) < cfg.min_junction_sep:
                return None
    for c in new_crossings:
        for p in points + [a, b] + new_crossings:
            if c is p:
                continue
            if math.hypot(c[0] - p[0], c[1] - p[1]) < cfg.min_junction_sep:
                return None
    return (a, b), new_crossings


def _sample_segments(rng, cfg: SceneConfig):
    margin = 3.0 * max(cfg.junction_sigma, cfg.line_sigma) + cfg.stride
    xs, ys = _lattice_candidates(cfg, margin)
    for _restart in range(60):
        segs: list[tuple[tuple[float, float], tuple[float, float]]] = []
        crossings: list[tuple[float, float]] = []
        ok = True
        for _ in range(cfg.n_segments):
            placed = None
            for _attempt in range(250):
                placed = _try_place(rng, cfg, xs, ys, segs, crossings)
                if placed is not None:
                    break
            if placed is None:
                ok = False
                break
            segs.append(placed[0])
            crossings.extend(placed[1])
        if ok:
            return segs
    raise GenerationError(
        f"could not place {cfg.n_segments} segments in {cfg.width}x{cfg.height} "
        f"under the clearance constraints"
    )


def _grid_coords(cfg: SceneConfig) -> tuple[np.ndarray, np.ndarray, tuple[int, int]]:
    gh = int(round(cfg.height / cfg.stride))
    gw = int(round(cfg.width / cfg.stride))
    ys, xs = np.mgrid[0:gh, 0:gw]
    return xs * cfg.stride, ys * cfg.stride, (gh, gw)


def _render_junctions(cfg: SceneConfig, truth: LineGraph, rng) -> PlanarField:
    px, py, shape = _grid_coords(cfg)
    vals = np.zeros(shape)
    s2 = 2.0 * cfg.junction_sigma**2
    cut = 3.0 * cfg.junction_sigma
    for j in truth.junctions:
        d2 = (px - j.x) ** 2 + (py - j.y) ** 2
        g = np.where(d2 <= cut * cut, np.exp(-d2 / s2), 0.0)
        vals = np.maximum(vals, g)
    if cfg.noise_amp > 0:
        vals = np.maximum(vals, rng.uniform(0.0, cfg.noise_amp, size=shape))
    return PlanarField(vals[None], cfg.stride)


def _render_lines(cfg: SceneConfig, segs, gaps: list[GapBand], rng) -> PlanarField:
    px, py, shape = _grid_coords(cfg)
    vals = np.zeros(shape)
    s2 = 2.0 * cfg.line_sigma**2
    cut = 3.0 * cfg.line_sigma
    bands = {g.segment: g for g in gaps}
    for idx, (a, b) in enumerate(segs):
        ax, ay = a
        dx, dy = b[0] - ax, b[1] - ay
        length = math.hypot(dx, dy)
        t = ((px - ax) * dx + (py - ay) * dy) / length
        tc = np.clip(t, 0.0, length)
        d2 = (px - (ax + tc * dx / length)) ** 2 + (py - (ay + tc * dy / length)) ** 2
        g = np.where(d2 <= cut * cut, np.exp(-d2 / s2), 0.0)
        band = bands.get(idx)
        if band is not None:
            g = np.where((t >= band.t0) & (t <= band.t1), 0.0, g)
        vals = np.maximum(vals, g)
    if cfg.noise_amp > 0:
        vals = np.maximum(vals, rng.uniform(0.0, cfg.noise_amp, size=shape))
    return PlanarField(vals[None], cfg.stride)


def generate(cfg: SceneConfig) -> SyntheticScene:
    """Deterministic random scene: truth graph plus rendered heatmaps.

    The zero band of a gapped segment is sized 0.15*length + 6*line_sigma + 2
    so that the fully dark stretch spans at least 15% of the segment and, at
    64 samples, at least 9 probes land on exact zeros.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    segs = _sample_segments(rng, cfg)

    points = [p for s in segs for p in s]
    seg_idx = [(2 * i, 2 * i + 1) for i in range(len(segs))]
    truth = canonicalize(RawAnnotation(cfg.width, cfg.height, points, seg_idx))
    if truth.min_junction_separation() < 6.0:
        raise GenerationError("junction separation dropped below 2x the NMS cutoff")

    gaps: list[GapBand] = []
    for i, (a, b) in enumerate(segs):
        if rng.random() < cfg.gap_prob:
            length = math.hypot(b[0] - a[0], b[1] - a[1])
            band_len = 0.15 * length + 6.0 * cfg.line_sigma + 2.0
            lo = 0.1 * length + band_len / 2
            hi = 0.9 * length - band_len / 2
            if hi <= lo:
                continue
            center = float(rng.uniform(max(lo, 0.4 * length), min(hi, 0.6 * length)))
            gaps.append(GapBand(i, a, b, center - band_len / 2, center + band_len / 2))

    junction_map = _render_junctions(cfg, truth, rng)
    line_map = _render_lines(cfg, segs, gaps, rng)
    return SyntheticScene(truth, junction_map, line_map, cfg, segs, gaps)


def render_overlay(scene: SyntheticScene, predicted: LineGraph) -> np.ndarray:
    """H x W x 3 overlay: reference pixels, predicted pixels, junctions."""
    from .metrics import rasterize

    if (predicted.width, predicted.height) != (scene.truth.width, scene.truth.height):
        raise ValueError("frame mismatch between scene and prediction")
    h, w = scene.truth.height, scene.truth.width
    img = np.zeros((h, w, 3), dtype=np.uint8)
    for px, py in rasterize(graph_to_segments(scene.truth)):
        img[py, px, 0] = 255
    for px, py in rasterize(graph_to_segments(predicted)):
        img[py, px, 1] = 255
    for g in (scene.truth, predicted):
        for j in g.junctions:
            px, py = int(math.floor(j.x + 0.5)), int(math.floor(j.y + 0.5))
            if 0 <= px < w and 0 <= py < h:
                img[py, px, 2] = 255
    return img


def save_overlay(img: np.ndarray, path) -> None:
    from PIL import Image

    Image.fromarray(img).save(path)


def save_scene(scene: SyntheticScene, out_dir, stem: str) -> list[str]:
    """Write truth graph, both heatmaps and a config sidecar; returns paths."""
    import os

    paths = []
    graph_path = os.path.join(out_dir, f"{stem}.graph.json")
    save_graph(scene.truth, graph_path)
    paths.append(graph_path)
    for name, fld in (("junctions", scene.junction_map), ("lines", scene.line_map)):
        p = os.path.join(out_dir, f"{stem}.{name}.ppgf")
        save_field(fld, p)
        paths.append(p)
    meta = {
        "config": asdict(scene.config),
        "gaps": [
            {"segment": g.segment, "a": list(g.a), "b": list(g.b), "t0": g.t0, "t1": g.t1}
            for g in scene.gaps
        ],
    }
    meta_path = os.path.join(out_dir, f"{stem}.meta.json")
    with open(meta_path, "w", encoding="ascii") as f:
        json.dump(meta, f, sort_keys=True, separators=(",", ":"))
        f.write("\n")
    paths.append(meta_path)
    return paths


def truth_segments(scene: SyntheticScene) -> SegmentSet:
    return graph_to_segments(scene.truth)


__all__ = [
    "GapBand",
    "GenerationError",
    "SceneConfig",
    "Segment",
    "SyntheticScene",
    "generate",
    "render_overlay",
    "save_overlay",
    "save_scene",
    "truth_segments",
]
