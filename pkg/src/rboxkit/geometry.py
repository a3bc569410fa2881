"""Exact 2-D geometry for axis-aligned and rotated boxes.

Coordinates follow the image convention: x grows right, y grows down.  A
polygon whose vertices run clockwise on screen has a *positive* shoelace sum
in raw (x, y) coordinates, which is the same thing as counterclockwise in the
usual y-up mathematical orientation.  Every polygon type in this module is
stored with that orientation, so the shoelace sum is the area.

The (d1, d2, h) rotated-box code
--------------------------------
Given an enclosing axis box with top-left corner (x0, y0), width W and height
H, a code places the *upper side* of the rotated rectangle:

* chirality 1: first endpoint on the left edge at (x0, y0 + d1*H), second
  endpoint on the top edge at (x0 + d2*W, y0);
* chirality 2: first endpoint on the top edge at (x0 + d1*W, y0), second
  endpoint on the right edge at (x0 + W, y0 + d2*H).

The rectangle then extends from the upper side into the box.  Its height is
``h * h_max`` where ``h_max`` is the largest height that keeps the rectangle
inside the box.  Without ``h`` both chiralities are returned at full height.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

EPS_GEOM = 1e-7


class GeometryError(ValueError):
    """Raised for degenerate or inconsistent geometric input."""


class Point(NamedTuple):
    x: float
    y: float


def _scale_tol(coords: Sequence[tuple[float, float]]) -> float:
    xs = [p[0] for p in coords]
    ys = [p[1] for p in coords]
    extent = max(max(xs) - min(xs), max(ys) - min(ys), 1e-300)
    return EPS_GEOM * max(extent, 1.0)


def _as_points(vertices) -> tuple[Point, ...]:
    if hasattr(vertices, "vertices"):
        vertices = vertices.vertices
    pts = []
    for v in vertices:
        x, y = float(v[0]), float(v[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise GeometryError(f"non-finite vertex ({x}, {y})")
        pts.append(Point(x, y))
    return tuple(pts)


def signed_area(vertices) -> float:
    """Shoelace sum; positive for screen-clockwise vertex order."""
    pts = vertices.vertices if hasattr(vertices, "vertices") else vertices
    n = len(pts)
    s = 0.0
    for i in range(n):
        x1, y1 = pts[i - 1]
        x2, y2 = pts[i]
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def polygon_area(p) -> float:
    """Area of a polygon by the shoelace sum of its vertex triangles.

    Accepts a :class:`ConvexPolygon`, an :class:`OrientedBox` or any sequence
    of (x, y) pairs.  Collinear input gives 0.0.
    """
    return abs(signed_area(p))


@dataclass(frozen=True)
class AxisBox:
    """Axis-aligned box in center form."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            if not math.isfinite(getattr(self, name)):
                raise GeometryError(f"AxisBox.{name} is not finite")
        if not (self.w > 0 and self.h > 0):
            raise GeometryError(f"AxisBox extents must be positive, got w={self.w}, h={self.h}")

    @classmethod
    def from_corners(cls, x_min: float, y_min: float, x_max: float, y_max: float) -> "AxisBox":
        return cls(0.5 * (x_min + x_max), 0.5 * (y_min + y_max), x_max - x_min, y_max - y_min)

    @property
    def x_min(self) -> float:
        return self.cx - 0.5 * self.w

    @property
    def y_min(self) -> float:
        return self.cy - 0.5 * self.h

    @property
    def x_max(self) -> float:
        return self.cx + 0.5 * self.w

    @property
    def y_max(self) -> float:
        return self.cy + 0.5 * self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    def corners(self) -> tuple[Point, Point, Point, Point]:
        """Top-left, top-right, bottom-right, bottom-left."""
        x0, y0, x1, y1 = self.x_min, self.y_min, self.x_max, self.y_max
        return (Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.cx, self.cy, self.w, self.h)

    def to_oriented(self) -> "OrientedBox":
        return OrientedBox(self.corners())

    def contains(self, pts, tol: float = 0.0) -> bool:
        return all(
            self.x_min - tol <= x <= self.x_max + tol and self.y_min - tol <= y <= self.y_max + tol
            for x, y in pts
        )


class ConvexPolygon:
    """Convex polygon with positive (screen-clockwise) orientation.

    Input in either orientation is accepted and reversed when needed.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices, validate: bool = True):
        pts = _as_points(vertices)
        if validate:
            if len(pts) < 3:
                raise GeometryError("a polygon needs at least 3 vertices")
            if signed_area(pts) < 0:
                pts = pts[::-1]
            _check_convex(pts)
        self.vertices = pts

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __repr__(self):
        return f"ConvexPolygon({[tuple(p) for p in self.vertices]})"

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.vertices == other.vertices

    def __hash__(self):
        return hash((type(self).__name__, self.vertices))

    @property
    def area(self) -> float:
        return polygon_area(self.vertices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)


def _check_convex(pts: Sequence[Point]) -> None:
    tol = _scale_tol(pts)
    n = len(pts)
    for i in range(n):
        a, b = pts[i - 1], pts[i]
        if abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol:
            raise GeometryError(f"repeated vertex {tuple(b)}")
    for i in range(n):
        a, b, c = pts[i - 2], pts[i - 1], pts[i]
        ux, uy = b.x - a.x, b.y - a.y
        vx, vy = c.x - b.x, c.y - b.y
        cross = ux * vy - uy * vx
        if cross < -tol * math.hypot(ux, uy) * max(math.hypot(vx, vy), 1.0):
            raise GeometryError("polygon is not convex")


def _canonical_start(pts: Sequence[Point], tol: float) -> int:
    """Index of the smallest-y vertex, ties (within tol) broken by smallest x."""
    y_min = min(p.y for p in pts)
    candidates = [i for i, p in enumerate(pts) if p.y - y_min <= tol]
    return min(candidates, key=lambda i: (pts[i].x, i))


class OrientedBox:
    """Rotated rectangle as 4 vertices, screen-clockwise.

    Vertex 1 is the corner with the smallest y (ties: smallest x), so an
    upright box starts at its top-left corner and a tilted one at its top
    vertex.  Zero-length sides are allowed and reported by ``degenerate``.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices, validate: bool = True):
        pts = _as_points(vertices)
        if len(pts) != 4:
            raise GeometryError(f"an oriented box needs exactly 4 vertices, got {len(pts)}")
        if signed_area(pts) < 0:
            pts = pts[::-1]
        tol = _scale_tol(pts)
        if validate:
            _check_rectangle(pts, tol)
        s = _canonical_start(pts, tol)
        self.vertices = pts[s:] + pts[:s]

    @classmethod
    def from_center(cls, cx: float, cy: float, width: float, height: float, angle: float) -> "OrientedBox":
        """Rectangle of size width x height rotated by ``angle`` radians about its center."""
        c, s = math.cos(angle), math.sin(angle)
        hw, hh = 0.5 * width, 0.5 * height
        pts = []
        for dx, dy in ((-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)):
            pts.append((cx + dx * c - dy * s, cy + dx * s + dy * c))
        return cls(pts)

    def __repr__(self):
        return f"OrientedBox({[tuple(p) for p in self.vertices]})"

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.vertices == other.vertices

    def __hash__(self):
        return hash((type(self).__name__, self.vertices))

    def __iter__(self):
        return iter(self.vertices)

    def __len__(self):
        return 4

    @property
    def side_lengths(self) -> tuple[float, float]:
        """Lengths of the sides leaving vertex 1 and vertex 2."""
        p0, p1, p2 = self.vertices[:3]
        return (math.hypot(p1.x - p0.x, p1.y - p0.y), math.hypot(p2.x - p1.x, p2.y - p1.y))

    @property
    def area(self) -> float:
        a, b = self.side_lengths
        return a * b

    @property
    def center(self) -> Point:
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return Point(sum(xs) / 4.0, sum(ys) / 4.0)

    @property
    def aspect(self) -> float:
        """Long side over short side; ``inf`` for a degenerate box."""
        a, b = self.side_lengths
        lo, hi = min(a, b), max(a, b)
        return hi / lo if lo > 0 else math.inf

    @property
    def degenerate(self) -> bool:
        a, b = self.side_lengths
        return min(a, b) <= _scale_tol(self.vertices)

    @property
    def axis_aligned(self) -> bool:
        p0, p1 = self.vertices[:2]
        dx, dy = p1.x - p0.x, p1.y - p0.y
        tol = EPS_GEOM * math.hypot(dx, dy)
        return abs(dx) <= tol or abs(dy) <= tol

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def to_polygon(self) -> ConvexPolygon:
        return ConvexPolygon(self.vertices, validate=False)


def _check_rectangle(pts: Sequence[Point], tol: float) -> None:
    edges = [(pts[(i + 1) % 4].x - pts[i].x, pts[(i + 1) % 4].y - pts[i].y) for i in range(4)]
    lengths = [math.hypot(*e) for e in edges]
    for i in range(2):
        if abs(lengths[i] - lengths[i + 2]) > tol:
            raise GeometryError("opposite sides of an oriented box differ in length")
        ex, ey = edges[i]
        fx, fy = edges[i + 2]
        if abs(ex * fy - ey * fx) > EPS_GEOM * lengths[i] * lengths[i + 2] + tol * tol:
            raise GeometryError("opposite sides of an oriented box are not parallel")
    for i in range(4):
        ex, ey = edges[i]
        fx, fy = edges[(i + 1) % 4]
        if abs(ex * fx + ey * fy) > EPS_GEOM * max(lengths[i] * lengths[(i + 1) % 4], tol * tol) + tol * tol:
            raise GeometryError("adjacent sides of an oriented box are not perpendicular")


# ---------------------------------------------------------------------------
# IOU


def iou_axis(a: AxisBox, b: AxisBox) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # areas from the same corner values, so identical boxes give exactly 1
    area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min)
    area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min)
    return min(1.0, inter / (area_a + area_b - inter))


def iou_matrix(a, b) -> np.ndarray:
    """Pairwise axis IOU between (n, 4) and (m, 4) arrays of (cx, cy, w, h)."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    a0 = a[:, None, :2] - 0.5 * a[:, None, 2:]
    a1 = a[:, None, :2] + 0.5 * a[:, None, 2:]
    b0 = b[None, :, :2] - 0.5 * b[None, :, 2:]
    b1 = b[None, :, :2] + 0.5 * b[None, :, 2:]
    wh = np.clip(np.minimum(a1, b1) - np.maximum(a0, b0), 0.0, None)
    inter = wh[..., 0] * wh[..., 1]
    ea = a1 - a0
    eb = b1 - b0
    union = ea[..., 0] * ea[..., 1] + eb[..., 0] * eb[..., 1] - inter
    return np.minimum(inter / union, 1.0)


def _clip_coords(subject: list, clip: Sequence) -> list:
    # Half-plane clipping of `subject` by each edge of `clip`; both positive orientation.
    out = subject
    for i in range(len(clip)):
        ax, ay = clip[i - 1]
        bx, by = clip[i]
        ex, ey = bx - ax, by - ay
        inp = out
        if not inp:
            return inp
        out = []
        px, py = inp[-1]
        pd = ex * (py - ay) - ey * (px - ax)
        for q in inp:
            qx, qy = q
            qd = ex * (qy - ay) - ey * (qx - ax)
            if qd >= 0.0:
                if pd < 0.0:
                    t = pd / (pd - qd)
                    out.append((px + t * (qx - px), py + t * (qy - py)))
                out.append(q)
            elif pd > 0.0:
                t = pd / (pd - qd)
                out.append((px + t * (qx - px), py + t * (qy - py)))
            px, py, pd = qx, qy, qd
    return out


def _shoelace(pts: Sequence) -> float:
    s = 0.0
    x1, y1 = pts[-1]
    for x2, y2 in pts:
        s += x1 * y2 - x2 * y1
        x1, y1 = x2, y2
    return 0.5 * s


def _cleanup(pts: list, tol: float) -> list:
    """Drop repeated and collinear vertices left over by clipping."""
    out = []
    for p in pts:
        if not out or abs(p[0] - out[-1][0]) > tol or abs(p[1] - out[-1][1]) > tol:
            out.append(p)
    while len(out) > 1 and abs(out[0][0] - out[-1][0]) <= tol and abs(out[0][1] - out[-1][1]) <= tol:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        for i in range(len(out)):
            a, b, c = out[i - 2], out[i - 1], out[i]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            if abs(cross) <= tol * (abs(c[0] - a[0]) + abs(c[1] - a[1])):
                del out[i - 1]
                changed = True
                break
    return out


def clip_convex(subject, clip) -> ConvexPolygon | None:
    """Intersection of two convex polygons, or ``None`` when it has no area."""
    s = [tuple(p) for p in _as_points(subject)]
    c = [tuple(p) for p in _as_points(clip)]
    if _shoelace(s) < 0:
        s.reverse()
    if _shoelace(c) < 0:
        c.reverse()
    pts = _clip_coords(s, c)
    if len(pts) < 3:
        return None
    pts = _cleanup(pts, _scale_tol(s + c))
    if len(pts) < 3 or _shoelace(pts) <= 0.0:
        return None
    return ConvexPolygon(pts, validate=False)


def iou_oriented(a, b) -> float:
    """IOU of two rotated boxes (or any two convex polygons)."""
    va = a.vertices if hasattr(a, "vertices") else [tuple(p) for p in a]
    vb = b.vertices if hasattr(b, "vertices") else [tuple(p) for p in b]
    area_a = _shoelace(va)
    area_b = _shoelace(vb)
    if area_a < 0:
        va, area_a = va[::-1], -area_a
    if area_b < 0:
        vb, area_b = vb[::-1], -area_b
    # cheap reject on bounding extents
    if (
        max(p[0] for p in va) <= min(p[0] for p in vb)
        or max(p[0] for p in vb) <= min(p[0] for p in va)
        or max(p[1] for p in va) <= min(p[1] for p in vb)
        or max(p[1] for p in vb) <= min(p[1] for p in va)
    ):
        return 0.0
    inter_pts = _clip_coords(list(va), vb)
    if len(inter_pts) < 3:
        return 0.0
    inter = _shoelace(inter_pts)
    if inter <= 0.0:
        return 0.0
    union = area_a + area_b - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, inter / union)


# ---------------------------------------------------------------------------
# Enclosing boxes


def convex_hull(points) -> list[Point]:
    """Monotone-chain hull, positive orientation, collinear points dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        return [Point(*p) for p in pts]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return [Point(*p) for p in hull]


def min_area_rect(quad) -> OrientedBox:
    """Minimum-area rotated rectangle enclosing a point set.

    The optimal rectangle has one side flush with a hull edge, so every hull
    edge direction is tried and the smallest area wins (first edge on ties).
    """
    pts = _as_points(quad)
    hull = convex_hull(pts)
    if len(hull) < 3 or polygon_area(hull) <= _scale_tol(pts) ** 2:
        raise GeometryError("min_area_rect needs at least 3 non-collinear points")
    h = np.asarray(hull, dtype=float)
    edges = np.roll(h, -1, axis=0) - h
    u = edges / np.hypot(edges[:, 0], edges[:, 1])[:, None]
    n = np.stack([-u[:, 1], u[:, 0]], axis=1)
    pu = h @ u.T
    pn = h @ n.T
    umin, umax = pu.min(axis=0), pu.max(axis=0)
    nmin, nmax = pn.min(axis=0), pn.max(axis=0)
    areas = (umax - umin) * (nmax - nmin)
    k = int(np.argmin(areas))
    uk, nk = u[k], n[k]
    corners = [
        umin[k] * uk + nmin[k] * nk,
        umax[k] * uk + nmin[k] * nk,
        umax[k] * uk + nmax[k] * nk,
        umin[k] * uk + nmax[k] * nk,
    ]
    return OrientedBox(corners, validate=False)


def enclosing_axis_box(r) -> AxisBox:
    pts = _as_points(r)
    xs = [p.x for p in pts]
    ys = [p.y for p in pts]
    return AxisBox.from_corners(min(xs), min(ys), max(xs), max(ys))


# ---------------------------------------------------------------------------
# (d1, d2, h) code


@dataclass(frozen=True)
class RBoxCode:
    d1: float
    d2: float
    h: float | None = None

    def __post_init__(self):
        for name in ("d1", "d2", "h"):
            v = getattr(self, name)
            if v is None:
                continue
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise GeometryError(f"RBoxCode.{name}={v} outside [0, 1]")

    @property
    def variant(self) -> int:
        return 2 if self.h is None else 3

    def as_tuple(self) -> tuple[float, ...]:
        return (self.d1, self.d2) if self.h is None else (self.d1, self.d2, self.h)

    @classmethod
    def clamped(cls, d1: float, d2: float, h: float | None = None) -> "RBoxCode":
        def c(v):
            return min(1.0, max(0.0, v))

        return cls(c(d1), c(d2), None if h is None else c(h))


def _upper_side(b: AxisBox, d1: float, d2: float, chirality: int):
    x0, y0, x1 = b.x_min, b.y_min, b.x_max
    if chirality == 1:
        return (x0, y0 + d1 * b.h), (x0 + d2 * b.w, y0)
    return (x0 + d1 * b.w, y0), (x1, y0 + d2 * b.h)


def _max_height(b: AxisBox, p1, p2, nx: float, ny: float) -> float:
    t = math.inf
    for px, py in (p1, p2):
        if nx > 0:
            t = min(t, (b.x_max - px) / nx)
        elif nx < 0:
            t = min(t, (b.x_min - px) / nx)
        if ny > 0:
            t = min(t, (b.y_max - py) / ny)
        elif ny < 0:
            t = min(t, (b.y_min - py) / ny)
    return max(t, 0.0)


def _side_frame(b: AxisBox, d1: float, d2: float, chirality: int):
    """Upper side frame together with the largest height that fits in the box.

    Returns ``None`` for the zero-length side, where the axis-aligned
    convention takes over.
    """
    p1, p2 = _upper_side(b, d1, d2, chirality)
    ux, uy = p2[0] - p1[0], p2[1] - p1[1]
    length = math.hypot(ux, uy)
    if length <= EPS_GEOM * max(b.w, b.h):
        return None
    nx, ny = -uy / length, ux / length
    return p1, p2, nx, ny, _max_height(b, p1, p2, nx, ny)


def _decode_one(b: AxisBox, d1: float, d2: float, h: float | None, chirality: int) -> OrientedBox:
    frame = _side_frame(b, d1, d2, chirality)
    frac = 1.0 if h is None else h
    if frame is None:
        # zero-length upper side: the upright box, top strip of height frac*H
        x0, y0, x1 = b.x_min, b.y_min, b.x_max
        y1 = y0 + frac * b.h
        return OrientedBox([(x0, y0), (x1, y0), (x1, y1), (x0, y1)], validate=False)
    p1, p2, nx, ny, t_max = frame
    t = frac * t_max
    pts = [p1, p2, (p2[0] + t * nx, p2[1] + t * ny), (p1[0] + t * nx, p1[1] + t * ny)]
    return OrientedBox(pts, validate=False)


def decode_rbox(b: AxisBox, code: RBoxCode) -> tuple[OrientedBox, ...]:
    """Rotated box(es) described by ``code`` inside ``b``.

    Two-term codes give both chirality candidates at maximal height; three-term
    codes give the single chirality-1 rectangle.  Degenerate codes produce thin
    boxes with ``degenerate`` set rather than raising.
    """
    if code.h is None:
        return (_decode_one(b, code.d1, code.d2, None, 1), _decode_one(b, code.d1, code.d2, None, 2))
    return (_decode_one(b, code.d1, code.d2, code.h, 1),)


def encode_rbox(r: OrientedBox, b: AxisBox, strict: bool = True) -> RBoxCode:
    """Three-term chirality-1 code of ``r`` relative to ``b``.

    With ``strict`` the upper side endpoints must sit on the left and top edges
    of ``b`` and ``r`` must lie inside ``b``.  Otherwise the upper side line is
    intersected with the left and top edges and every field is clamped to
    [0, 1], which is what noisy training crops need.
    """
    if not isinstance(r, OrientedBox):
        r = OrientedBox(r)
    tol = EPS_GEOM * max(b.w, b.h, 1.0)
    if strict and not b.contains(r.vertices, tol):
        raise GeometryError("rotated box is not inside the axis box")
    W, H = b.w, b.h
    x0, y0 = b.x_min, b.y_min

    if r.axis_aligned:
        tl = r.vertices[0]
        br = r.vertices[2]
        if abs(br.x - tl.x - W) <= tol and abs(br.y - tl.y - H) <= tol:
            if strict and (abs(tl.x - x0) > tol or abs(tl.y - y0) > tol):
                raise GeometryError("rotated box is not inscribed in the axis box")
            return RBoxCode(0.0, 0.0, 1.0)
        if strict:
            if abs(tl.x - x0) > tol or abs(tl.y - y0) > tol:
                raise GeometryError("upright box does not touch the top-left corner of the axis box")
            return RBoxCode.clamped(0.0, (br.x - tl.x) / W, (br.y - tl.y) / H)
        return RBoxCode.clamped(0.0, 0.0, (br.y - tl.y) / H)

    top, _, bottom, left = r.vertices
    if strict:
        if abs(left.x - x0) > tol or abs(top.y - y0) > tol:
            raise GeometryError("rotated box is not inscribed in the axis box")
        d1 = (left.y - y0) / H
        d2 = (top.x - x0) / W
    else:
        dx, dy = top.x - left.x, top.y - left.y
        d1 = (left.y + (x0 - left.x) * dy / dx - y0) / H
        d2 = (top.x + (y0 - top.y) * dx / dy - x0) / W
        d1 = min(1.0, max(0.0, d1))
        d2 = min(1.0, max(0.0, d2))
    height = math.hypot(bottom.x - left.x, bottom.y - left.y)
    frame = _side_frame(b, d1, d2, 1)
    t_max = frame[4] if frame is not None else H
    h = height / t_max if t_max > 0 else 1.0
    if strict and h > 1.0 + 1e-6:
        raise GeometryError("rotated box is taller than the inscribed maximum")
    return RBoxCode.clamped(d1, d2, h)


def canonical_quad(quad) -> list[Point]:
    """Sort 4 arbitrary-order quad points screen-clockwise, vertex 1 at the top.

    Points are ordered by angle around their centroid; the start is the
    smallest-y vertex, ties broken by smallest x.
    """
    pts = _as_points(quad)
    cx = sum(p.x for p in pts) / len(pts)
    cy = sum(p.y for p in pts) / len(pts)
    ordered = sorted(pts, key=lambda p: math.atan2(p.y - cy, p.x - cx))
    s = _canonical_start(ordered, _scale_tol(ordered))
    return list(ordered[s:] + ordered[:s])


def points_array(objs: Iterable) -> np.ndarray:
    """Stack the vertices of several boxes into an (n, k, 2) array."""
    return np.asarray([[tuple(p) for p in o] for o in objs], dtype=float)
