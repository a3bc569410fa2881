"""Default boxes: grid placement and shape selection by IOU k-means.

Box shapes are compared co-centered, so the clustering distance
``1 - IOU`` only sees widths and heights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import AxisBox

MAX_ITER = 300
RESTARTS = 10


@dataclass(frozen=True)
class BoxShape:
    w: float
    h: float

    def __post_init__(self):
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"box shape must lie in (0, 1], got ({self.w}, {self.h})")


@dataclass(frozen=True)
class DefaultBoxSet:
    """Shape prototypes placed once per feature-map cell, centered in the cell."""

    shapes: tuple[BoxShape, ...]
    grid_sizes: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "shapes", tuple(self.shapes))
        object.__setattr__(self, "grid_sizes", tuple(tuple(g) for g in self.grid_sizes))
        if not self.shapes:
            raise ValueError("a default box set needs at least one shape")
        if not self.grid_sizes:
            raise ValueError("a default box set needs at least one grid")
        for rows, cols in self.grid_sizes:
            if rows <= 0 or cols <= 0:
                raise ValueError(f"grid size must be positive, got {rows}x{cols}")

    def __len__(self):
        return sum(r * c for r, c in self.grid_sizes) * len(self.shapes)


@dataclass
class ClusterModel:
    centroids: list[BoxShape]
    assignments: np.ndarray
    miou: float
    iterations: int = 0
    restart: int = 0
    history: list[float] = field(default_factory=list, repr=False)

    def centroid_array(self) -> np.ndarray:
        return shapes_array(self.centroids)


@dataclass(frozen=True)
class ReportRow:
    name: str
    count: int
    miou: float


def shapes_array(shapes) -> np.ndarray:
    if isinstance(shapes, np.ndarray):
        return shapes.astype(float).reshape(-1, 2)
    return np.asarray([(s.w, s.h) if isinstance(s, BoxShape) else tuple(s) for s in shapes], dtype=float).reshape(-1, 2)


def shape_iou(boxes, centroids) -> np.ndarray:
    """(n, k) IOU of co-centered shapes."""
    b = shapes_array(boxes)
    c = shapes_array(centroids)
    inter = np.minimum(b[:, None, 0], c[None, :, 0]) * np.minimum(b[:, None, 1], c[None, :, 1])
    union = (b[:, 0] * b[:, 1])[:, None] + (c[:, 0] * c[:, 1])[None, :] - inter
    return inter / union


def cluster_distance(b: BoxShape, c: BoxShape) -> float:
    inter = min(b.w, c.w) * min(b.h, c.h)
    return 1.0 - inter / (b.w * b.h + c.w * c.h - inter)


def _farthest_point_init(x: np.ndarray, k: int, first: int) -> np.ndarray:
    chosen = [first]
    dist = 1.0 - shape_iou(x, x[[first]])[:, 0]
    for _ in range(1, k):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, 1.0 - shape_iou(x, x[[nxt]])[:, 0])
    return x[chosen].copy()


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int):
    k = len(centroids)
    assign = None
    it = 0
    for it in range(1, max_iter + 1):
        d = 1.0 - shape_iou(x, centroids)
        new = np.argmin(d, axis=1)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        nearest = d[np.arange(len(x)), assign]
        for j in range(k):
            members = assign == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
            else:
                # reseed to the worst-served box; remove it from further reseeds
                worst = int(np.argmax(nearest))
                centroids[j] = x[worst]
                nearest[worst] = -1.0
    d = 1.0 - shape_iou(x, centroids)
    assign = np.argmin(d, axis=1)
    miou = float(np.mean(1.0 - d[np.arange(len(x)), assign]))
    return centroids, assign, miou, it


def kmeans_shapes(
    boxes: Sequence[BoxShape] | np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = RESTARTS,
    max_iter: int = MAX_ITER,
) -> ClusterModel:
    """K-means over box shapes with distance ``1 - IOU``.

    Each restart seeds its first centroid from ``seed``'s RNG and picks the
    rest by farthest-point under the same distance; centroids update to the
    mean (w, h) of their members.  The restart with the highest mean IOU is
    returned, the earliest one on ties.
    """
    x = shapes_array(boxes)
    if len(x) == 0:
        raise ValueError("kmeans_shapes needs at least one box")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    distinct = len(np.unique(x, axis=0))
    if k > distinct:
        raise ValueError(f"k={k} exceeds the number of distinct shapes ({distinct})")
    rng = np.random.default_rng(seed)
    firsts = rng.integers(0, len(x), size=restarts)
    best = None
    history = []
    for r, first in enumerate(firsts):
        init = _farthest_point_init(x, k, int(first))
        centroids, assign, miou, it = _lloyd(x, init, max_iter)
        history.append(miou)
        if best is None or miou > best.miou:
            best = ClusterModel([BoxShape(*map(float, c)) for c in centroids], assign, miou, it, r)
    best.history = history
    return best


def miou_report(
    boxes: Sequence[BoxShape] | np.ndarray,
    candidate_sets: Mapping[str, Sequence] | Sequence[tuple[str, Sequence]],
) -> list[ReportRow]:
    """Mean over boxes of the best IOU to any candidate, per candidate set."""
    x = shapes_array(boxes)
    if len(x) == 0:
        raise ValueError("miou_report needs at least one box")
    items = candidate_sets.items() if isinstance(candidate_sets, Mapping) else candidate_sets
    rows = []
    for name, cands in items:
        c = shapes_array(cands)
        rows.append(ReportRow(name, len(c), float(np.mean(shape_iou(x, c).max(axis=1)))))
    return rows


def format_report(rows: Sequence[ReportRow], approach_header: str = "Approach") -> str:
    """Aligned text table: approach, number of default boxes, mIOU in percent."""
    head = (approach_header, "# def. boxes", "mIOU (%)")
    body = [(r.name, str(r.count), f"{100 * r.miou:.2f}") for r in rows]
    widths = [max(len(row[i]) for row in [head] + body) for i in range(3)]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths))) for row in [head] + body]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)


def ssd_baseline_shapes(
    scales: Sequence[float] = (0.2, 0.34),
    ratios: Sequence[float] = (1.0, 2.0, 3.0, 1 / 2, 1 / 3),
) -> list[BoxShape]:
    """Hand-picked SSD-style set: w = s*sqrt(a), h = s/sqrt(a) per scale and ratio."""
    out = []
    for s in scales:
        for a in ratios:
            out.append(BoxShape(min(1.0, s * math.sqrt(a)), min(1.0, s / math.sqrt(a))))
    return out


def default_box_array(spec: DefaultBoxSet, image_size: tuple[float, float] = (1.0, 1.0)) -> np.ndarray:
    """(n, 4) array of (cx, cy, w, h); grid by grid, row-major, shapes innermost."""
    W, H = image_size
    shapes = shapes_array(spec.shapes)
    out = []
    for rows, cols in spec.grid_sizes:
        ys = (np.arange(rows) + 0.5) / rows
        xs = (np.arange(cols) + 0.5) / cols
        cy, cx = np.meshgrid(ys, xs, indexing="ij")
        centers = np.stack([cx.ravel(), cy.ravel()], axis=1)
        c = np.repeat(centers, len(shapes), axis=0)
        wh = np.tile(shapes, (len(centers), 1))
        out.append(np.hstack([c, wh]))
    arr = np.vstack(out)
    return arr * np.array([W, H, W, H], dtype=float)


def generate_default_boxes(spec: DefaultBoxSet, image_size: tuple[float, float] = (1.0, 1.0)) -> list[AxisBox]:
    return [AxisBox(*row) for row in default_box_array(spec, image_size).tolist()]
