"""Shared generators for randomized tests.

The annotation generator builds deliberately messy endpoint annotations:
jittered collinear chains, duplicated fragments, unannotated crossings and
isolated junctions, i.e. every defect the canonicalizer exists to repair.
"""

from __future__ import annotations

import math

import numpy as np

from ppgraph import RawAnnotation


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_annotation(seed: int, width: int = 256, height: int = 256) -> RawAnnotation:
    rng = rng_for(seed)
    junctions: list[tuple[float, float]] = []
    segments: list[tuple[int, int]] = []

    def add_point(x, y):
        x = min(max(float(x), 1.0), width - 2.0)
        y = min(max(float(y), 1.0), height - 2.0)
        junctions.append((x, y))
        return len(junctions) - 1

    def far_enough(x, y, d=9.0):
        return all(math.hypot(x - px, y - py) >= d for px, py in junctions)

    def sample_far(d=9.0):
        for _ in range(300):
            x = rng.uniform(20, width - 20)
            y = rng.uniform(20, height - 20)
            if far_enough(x, y, d):
                return x, y
        return rng.uniform(20, width - 20), rng.uniform(20, height - 20)

    def in_frame_ray(length):
        """Start point and direction keeping the whole run inside the frame."""
        for _ in range(300):
            ang = rng.uniform(0, 2 * math.pi)
            dx, dy = math.cos(ang), math.sin(ang)
            x0 = rng.uniform(15, width - 15)
            y0 = rng.uniform(15, height - 15)
            x1, y1 = x0 + length * dx, y0 + length * dy
            if 10 <= x1 <= width - 10 and 10 <= y1 <= height - 10 and far_enough(x0, y0):
                return x0, y0, dx, dy
        return width / 2, height / 2, 1.0, 0.0

    # Jittered collinear chains, split into consecutive fragments.
    for _ in range(int(rng.integers(1, 4))):
        total = rng.uniform(80, 170)
        x0, y0, dx, dy = in_frame_ray(total)
        n_mid = int(rng.integers(1, 4))
        ts = np.sort(rng.uniform(0.25, 0.75, size=n_mid)) * total
        ts = np.concatenate([[0.0], ts, [total]])
        if np.min(np.diff(ts)) < 12.0:
            ts = np.linspace(0.0, total, n_mid + 2)
        ids = []
        for t in ts:
            jit = rng.uniform(-0.8, 0.8)
            ids.append(add_point(x0 + t * dx - jit * dy, y0 + t * dy + jit * dx))
        for a, b in zip(ids, ids[1:]):
            segments.append((a, b))
        if rng.random() < 0.5 and len(ids) > 2:
            # Redundant fragment spanning part of the chain.
            segments.append((ids[0], ids[2]))

    # Standalone segments, some crossing the chains.
    for _ in range(int(rng.integers(1, 4))):
        length = rng.uniform(60, 140)
        x0, y0, dx, dy = in_frame_ray(length)
        a = add_point(x0, y0)
        b = add_point(x0 + length * dx, y0 + length * dy)
        segments.append((a, b))

    # Isolated junctions to be dropped.
    for _ in range(int(rng.integers(0, 3))):
        x, y = sample_far()
        add_point(x, y)

    return RawAnnotation(width, height, junctions, segments)
