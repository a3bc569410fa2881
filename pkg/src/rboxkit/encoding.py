"""Ground-truth matching and regression targets."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .geometry import (
    AxisBox,
    GeometryError,
    OrientedBox,
    RBoxCode,
    clip_convex,
    enclosing_axis_box,
    encode_rbox,
    min_area_rect,
)
from .geometry import iou_matrix


@dataclass(frozen=True)
class BoxDelta:
    t_cx: float
    t_cy: float
    t_w: float
    t_h: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.t_cx, self.t_cy, self.t_w, self.t_h)


@dataclass
class MatchResult:
    pairs: list[tuple[int, int]]
    positives: set[int]
    negatives: set[int]
    ious: np.ndarray = field(repr=False)

    def gt_of(self) -> dict[int, int]:
        """Default-box index -> ground-truth index."""
        return {i: j for j, i in self.pairs}


@dataclass(frozen=True)
class RBoxTarget:
    image_id: str
    crop: AxisBox
    code: RBoxCode
    variant: int = 3


def _box_array(boxes) -> np.ndarray:
    if isinstance(boxes, np.ndarray):
        return boxes.astype(float).reshape(-1, 4)
    return np.asarray([b.as_tuple() if isinstance(b, AxisBox) else tuple(b) for b in boxes], dtype=float).reshape(-1, 4)


def encode_delta(g: AxisBox, d: AxisBox) -> BoxDelta:
    if not (g.w > 0 and g.h > 0):
        raise ValueError("ground-truth box must have positive extents")
    return BoxDelta((g.cx - d.cx) / d.w, (g.cy - d.cy) / d.h, math.log(g.w / d.w), math.log(g.h / d.h))


def decode_delta(t: BoxDelta, d: AxisBox) -> AxisBox:
    return AxisBox(d.cx + t.t_cx * d.w, d.cy + t.t_cy * d.h, d.w * math.exp(t.t_w), d.h * math.exp(t.t_h))


def encode_deltas(g, d) -> np.ndarray:
    """Vectorized :func:`encode_delta` over (n, 4) center-form arrays."""
    g = _box_array(g)
    d = _box_array(d)
    return np.hstack([(g[:, :2] - d[:, :2]) / d[:, 2:], np.log(g[:, 2:] / d[:, 2:])])


def decode_deltas(t, d) -> np.ndarray:
    t = np.asarray(t, dtype=float).reshape(-1, 4)
    d = _box_array(d)
    return np.hstack([d[:, :2] + t[:, :2] * d[:, 2:], d[:, 2:] * np.exp(t[:, 2:])])


def match_boxes(gts, defaults, threshold: float = 0.5) -> MatchResult:
    """Assign ground truths to default boxes.

    Every ground truth first claims its best default box.  Claims are resolved
    globally from the highest IOU down, so when two ground truths want the same
    box the higher-IOU one wins and the other falls back to its next best.
    Remaining default boxes whose best IOU reaches ``threshold`` join their
    best ground truth.  Ties go to the lower index.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    d = _box_array(defaults)
    if len(d) == 0:
        raise ValueError("no default boxes")
    g = _box_array(gts)
    n_d = len(d)
    if len(g) == 0:
        return MatchResult([], set(), set(range(n_d)), np.zeros((0, n_d)))
    iou = iou_matrix(g, d)
    owner = -np.ones(n_d, dtype=int)

    # global greedy; stable sort on -iou keeps (gt, default) row-major order on ties
    order = np.argsort(-iou, axis=None, kind="stable")
    gt_done = np.zeros(len(g), dtype=bool)
    remaining = min(len(g), n_d)
    for flat in order:
        if remaining == 0:
            break
        j, i = divmod(int(flat), n_d)
        if gt_done[j] or owner[i] >= 0:
            continue
        owner[i] = j
        gt_done[j] = True
        remaining -= 1

    best_gt = np.argmax(iou, axis=0)
    best_iou = iou[best_gt, np.arange(n_d)]
    extra = (owner < 0) & (best_iou >= threshold)
    owner[extra] = best_gt[extra]

    pos = np.flatnonzero(owner >= 0)
    pairs = sorted((int(owner[i]), int(i)) for i in pos)
    return MatchResult(pairs, set(pos.tolist()), set(np.flatnonzero(owner < 0).tolist()), iou)


def select_hard_negatives(losses, positive_count: int, ratio: float = 3.0) -> set[int]:
    """Highest-loss negatives, ``floor(ratio * positive_count)`` of them.

    ``losses`` maps default-box index to loss (a plain sequence is indexed by
    position).  Ties prefer the lower index.
    """
    if not ratio > 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    items = losses.items() if isinstance(losses, Mapping) else enumerate(losses)
    keep = int(math.floor(ratio * positive_count))
    picked = heapq.nsmallest(keep, ((-float(v), int(i)) for i, v in items))
    return {i for _, i in picked}


def _perturbed_box(b: AxisBox, jitter: float, rng: np.random.Generator) -> AxisBox:
    corners = np.asarray(b.corners(), dtype=float)
    noise = rng.uniform(-jitter, jitter, size=(4, 2)) * np.array([b.w, b.h])
    moved = corners + noise
    lo, hi = moved.min(axis=0), moved.max(axis=0)
    return AxisBox.from_corners(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def rbox_target(rect: OrientedBox, crop: AxisBox) -> RBoxCode:
    """Code of ``rect`` against a crop that need not enclose it exactly.

    When the rectangle pokes outside the crop it is replaced by the minimal
    rectangle around its intersection with the crop; the code is clamped.
    """
    tol = 1e-7 * max(crop.w, crop.h, 1.0)
    if not crop.contains(rect.vertices, tol):
        inter = clip_convex(rect, crop.to_oriented())
        if inter is not None:
            try:
                rect = min_area_rect(inter)
            except GeometryError:
                pass
    return encode_rbox(rect, crop, strict=False)


def build_rbox_targets(
    gt_quads: Sequence,
    jitter: float = 0.1,
    seed: int = 0,
    image_id: str = "",
    variant: int = 3,
) -> list[RBoxTarget]:
    """Regression targets for the rotated-box stage.

    Each quad becomes its minimal rotated rectangle and that rectangle's axis
    box.  The four corners of the axis box are moved by uniform noise of up to
    ``jitter`` times the box width (x) and height (y), the moved corners are
    re-enclosed, and the rectangle is coded against the noisy crop.
    """
    if not 0.0 <= jitter < 0.5:
        raise ValueError(f"jitter must be in [0, 0.5), got {jitter}")
    if variant not in (2, 3):
        raise ValueError(f"variant must be 2 or 3, got {variant}")
    rng = np.random.default_rng(seed)
    out = []
    for quad in gt_quads:
        rect = quad if isinstance(quad, OrientedBox) else min_area_rect(quad)
        box = enclosing_axis_box(rect)
        if jitter > 0:
            crop = _perturbed_box(box, jitter, rng)
            code = rbox_target(rect, crop)
        else:
            crop = box
            code = encode_rbox(rect, crop)
        if variant == 2:
            code = RBoxCode(code.d1, code.d2)
        out.append(RBoxTarget(image_id, crop, code, variant))
    return out
