"""Synthetic annotated scenes of square-ish and elongated oriented targets.

Label-like objects are near-square rectangles and tape-like objects are long
thin rectangles; irregular blobs are random convex quads.  Everything is driven
by an explicit seed.  Pixels are optional and only meant for looking at.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geometry import OrientedBox, enclosing_axis_box, iou_oriented
from .metrics import Detection, GroundTruthObject

FAMILIES = ("square", "elongated", "blob")
ASPECT = {"square": (1.0, 1.5), "elongated": (4.0, 12.0), "blob": (1.0, 2.0)}
LONG_SIDE = {"square": (0.04, 0.16), "elongated": (0.2, 0.6), "blob": (0.05, 0.2)}
MAX_REJECTIONS = 10_000


class CapacityError(RuntimeError):
    """Raised when objects of a class cannot be placed under the overlap limit."""


@dataclass(frozen=True)
class ClassSpec:
    """One object class.  Sizes are fractions of the shorter image side."""

    name: str
    count: int
    family: str = "square"
    long_side: tuple[float, float] | None = None
    aspect: tuple[float, float] | None = None

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"class {self.name!r}: count must be >= 0")
        if self.family not in FAMILIES:
            raise ValueError(f"class {self.name!r}: family must be one of {FAMILIES}, got {self.family!r}")
        for attr in ("long_side", "aspect"):
            v = getattr(self, attr)
            if v is not None:
                v = tuple(float(x) for x in v)
                object.__setattr__(self, attr, v)
                if len(v) != 2 or not 0 < v[0] <= v[1]:
                    raise ValueError(f"class {self.name!r}: {attr} must be an increasing positive pair")
        if self.aspect is not None and self.aspect[0] < 1:
            raise ValueError(f"class {self.name!r}: aspect must be >= 1")

    @property
    def size_range(self) -> tuple[float, float]:
        return self.long_side or LONG_SIDE[self.family]

    @property
    def aspect_range(self) -> tuple[float, float]:
        return self.aspect or ASPECT[self.family]


@dataclass(frozen=True)
class SceneSpec:
    width: float = 512.0
    height: float = 512.0
    classes: tuple[ClassSpec, ...] = ()
    overlap_limit: float = 0.0
    angle_range: tuple[float, float] = (0.0, 180.0)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        if not (self.width > 0 and self.height > 0):
            raise ValueError("width and height must be positive")
        if not 0.0 <= self.overlap_limit < 1.0:
            raise ValueError(f"overlap_limit must be in [0, 1), got {self.overlap_limit}")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ValueError("class names must be unique")

    @property
    def class_names(self) -> list[str]:
        return [c.name for c in self.classes]

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSpec":
        allowed = {"width", "height", "classes", "overlap_limit", "angle_range", "seed", "images"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown scene spec field(s): {sorted(unknown)}")
        classes = []
        for k, c in enumerate(d.get("classes", [])):
            extra = set(c) - {"name", "count", "family", "long_side", "aspect"}
            if extra:
                raise ValueError(f"unknown field(s) in classes[{k}]: {sorted(extra)}")
            classes.append(ClassSpec(**c))
        kw = {k: d[k] for k in ("width", "height", "overlap_limit", "seed") if k in d}
        if "angle_range" in d:
            kw["angle_range"] = tuple(d["angle_range"])
        return cls(classes=tuple(classes), **kw)


@dataclass
class SceneAnnotation:
    image_id: str
    width: float
    height: float
    objects: list[GroundTruthObject]
    class_names: list[str]
    spec: SceneSpec | None = field(default=None, repr=False)
    seed: int | None = None


def _sample_object(rng: np.random.Generator, c: ClassSpec, spec: SceneSpec) -> list[tuple[float, float]]:
    short_img = min(spec.width, spec.height)
    long_side = rng.uniform(*c.size_range) * short_img
    aspect = rng.uniform(*c.aspect_range)
    angle = math.radians(rng.uniform(*spec.angle_range))
    cx = rng.uniform(0, spec.width)
    cy = rng.uniform(0, spec.height)
    if c.family == "blob":
        # four points at spread-out angles on an ellipse: always a convex quad
        base = rng.uniform(0, 2 * math.pi) + np.arange(4) * (math.pi / 2)
        thetas = base + rng.uniform(-0.5, 0.5, 4)
        a, b = long_side / 2, long_side / (2 * aspect)
        ca, sa = math.cos(angle), math.sin(angle)
        pts = []
        for t in thetas:
            x, y = a * math.cos(t), b * math.sin(t)
            pts.append((cx + x * ca - y * sa, cy + x * sa + y * ca))
        return pts
    box = OrientedBox.from_center(cx, cy, long_side, long_side / aspect, angle)
    return [tuple(p) for p in box.vertices]


def _inside(pts, spec: SceneSpec) -> bool:
    return all(0.0 <= x <= spec.width and 0.0 <= y <= spec.height for x, y in pts)


def generate_scene(spec: SceneSpec, image_id: str = "img_00000", seed: int | None = None) -> SceneAnnotation:
    """Rejection-sample every object of every class into one image.

    A candidate is kept when its quad and rotated box lie inside the image
    and its rotated-box IOU with every earlier object is at most
    ``spec.overlap_limit``.
    """
    seed = spec.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    objects: list[GroundTruthObject] = []
    for class_id, c in enumerate(spec.classes, start=1):
        for _ in range(c.count):
            for _attempt in range(MAX_REJECTIONS):
                quad = _sample_object(rng, c, spec)
                if not _inside(quad, spec):
                    continue
                obj = GroundTruthObject.from_quad(image_id, class_id, quad)
                if not _inside(obj.rbox.vertices, spec):
                    continue
                if any(iou_oriented(obj.rbox, o.rbox) > spec.overlap_limit for o in objects):
                    continue
                objects.append(obj)
                break
            else:
                raise CapacityError(
                    f"could not place an object of class {c.name!r} after {MAX_REJECTIONS} attempts"
                )
    return SceneAnnotation(image_id, spec.width, spec.height, objects, spec.class_names, spec, seed)


def generate_dataset(spec: SceneSpec, n_images: int, seed: int | None = None) -> list[SceneAnnotation]:
    """Independent scenes with per-scene seeds spawned from one root seed."""
    root = np.random.SeedSequence(spec.seed if seed is None else seed)
    out = []
    for i, child in enumerate(root.spawn(n_images)):
        s = int(child.generate_state(1)[0])
        out.append(generate_scene(spec, f"img_{i:05d}", seed=s))
    return out


def _split_rect(rbox: OrientedBox, n: int) -> list[list[tuple[float, float]]]:
    v = np.asarray(rbox.vertices, dtype=float)
    a, b = rbox.side_lengths
    if b > a:
        v = np.roll(v, -1, axis=0)
    p0, p1, p2, p3 = v
    parts = []
    for k in range(n):
        s, t = k / n, (k + 1) / n
        parts.append([tuple(p0 + s * (p1 - p0)), tuple(p0 + t * (p1 - p0)), tuple(p3 + t * (p2 - p3)), tuple(p3 + s * (p2 - p3))])
    return parts


def apply_approach(ann, mode: str = "B", aspect_threshold: float = 2.5) -> list[GroundTruthObject]:
    """Ground truth under approach A (one box per target) or B (elongated targets split).

    In mode B an object whose rotated box has aspect above the threshold is cut
    into ``ceil(aspect / threshold)`` equal parts along its long side; each part
    is re-annotated from its own quad.
    """
    if mode not in ("A", "B"):
        raise ValueError(f"mode must be 'A' or 'B', got {mode!r}")
    if not aspect_threshold > 1:
        raise ValueError("aspect_threshold must exceed 1")
    objects = ann.objects if hasattr(ann, "objects") else list(ann)
    if mode == "A":
        return list(objects)
    out = []
    for o in objects:
        aspect = o.rbox.aspect
        if aspect <= aspect_threshold * (1 + 1e-9):
            out.append(o)
            continue
        n = math.ceil(aspect / aspect_threshold - 1e-9)
        for part in _split_rect(o.rbox, n):
            out.append(GroundTruthObject.from_quad(o.image_id, o.class_id, part))
    return out


def _score(score_model, rng: np.random.Generator) -> float:
    if callable(score_model):
        s = score_model(rng)
    elif isinstance(score_model, (tuple, list)):
        s = rng.uniform(*score_model)
    else:
        s = score_model
    return float(min(1.0, max(0.0, s)))


def corrupt_predictions(
    ann,
    drop_rate: float = 0.0,
    jitter: float = 0.0,
    score_model: float | tuple[float, float] | Callable = 1.0,
    seed: int = 0,
) -> list[Detection]:
    """Simulated detector output for one or more annotated scenes.

    Each object is dropped with probability ``drop_rate``; survivors have their
    rotated box moved by Gaussian noise (center shift and log-size change with
    standard deviation ``jitter`` in units of the box sides, rotation with
    standard deviation ``jitter`` radians) and get a score from
    ``score_model``.  That is either a constant or a (low, high) uniform range;
    a callable taking the RNG also works.
    """
    if not 0.0 <= drop_rate <= 1.0:
        raise ValueError("drop_rate must be in [0, 1]")
    if jitter < 0:
        raise ValueError("jitter must be non-negative")
    scenes = [ann] if hasattr(ann, "objects") else list(ann)
    rng = np.random.default_rng(seed)
    out = []
    for scene in scenes:
        for o in scene.objects:
            u = rng.uniform()
            noise = rng.normal(size=5)
            score = _score(score_model, rng)
            if u < drop_rate:
                continue
            if jitter == 0:
                rbox = o.rbox
            else:
                v = np.asarray(o.rbox.vertices)
                w, h = o.rbox.side_lengths
                ang = math.atan2(v[1, 1] - v[0, 1], v[1, 0] - v[0, 0])
                c = v.mean(axis=0)
                rbox = OrientedBox.from_center(
                    c[0] + noise[0] * jitter * w,
                    c[1] + noise[1] * jitter * h,
                    w * math.exp(noise[2] * jitter),
                    h * math.exp(noise[3] * jitter),
                    ang + noise[4] * jitter,
                )
            out.append(Detection(o.image_id, o.class_id, score, enclosing_axis_box(rbox), rbox=rbox))
    return out


def render_scene(ann: SceneAnnotation, palette: Sequence[tuple[int, int, int]] | None = None):
    """Flat-color RGB raster of the quads, for eyeballing only."""
    from PIL import Image, ImageDraw

    palette = palette or [(230, 25, 75), (60, 180, 75), (0, 130, 200), (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230)]
    img = Image.new("RGB", (int(math.ceil(ann.width)), int(math.ceil(ann.height))), (255, 255, 255))
    draw = ImageDraw.Draw(img)
    for o in ann.objects:
        draw.polygon([tuple(p) for p in o.quad.vertices], fill=palette[(o.class_id - 1) % len(palette)])
    return img
