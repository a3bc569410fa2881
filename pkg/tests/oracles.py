"""Independent reference computations used by the test suite.

Nothing here imports the library's geometry kernels, so each oracle checks
the implementation along a different route.
"""

import itertools
import math

import numpy as np


def inside_convex(points, poly):
    """Boolean mask of points inside a convex polygon given in either orientation."""
    poly = np.asarray(poly, dtype=float)
    x = poly[:, 0]
    y = poly[:, 1]
    sign = np.sign(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    mask = np.ones(len(points), dtype=bool)
    for i in range(len(poly)):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % len(poly)]
        cross = (bx - ax) * (points[:, 1] - ay) - (by - ay) * (points[:, 0] - ax)
        mask &= sign * cross >= 0
    return mask


def mc_iou(poly_a, poly_b, n=10**6, rng=None):
    """Monte-Carlo rasterization estimate of IOU over the joint bounding box."""
    rng = np.random.default_rng(0) if rng is None else rng
    allp = np.vstack([poly_a, poly_b])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    pts = rng.uniform(lo, hi, size=(n, 2))
    ina = inside_convex(pts, poly_a)
    inb = inside_convex(pts, poly_b)
    both = np.count_nonzero(ina & inb)
    union = np.count_nonzero(ina | inb)
    return both / union if union else 0.0


def mc_area(poly, n=10**6, rng=None):
    rng = np.random.default_rng(0) if rng is None else rng
    poly = np.asarray(poly, dtype=float)
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    pts = rng.uniform(lo, hi, size=(n, 2))
    return np.count_nonzero(inside_convex(pts, poly)) / n * np.prod(hi - lo)


def sweep_rect_area(points, step_deg=0.1, refine=False):
    """Smallest bounding-rectangle area over a rotation sweep.

    ``refine`` adds a dense local sweep around the best coarse angle so the
    estimate converges to the true minimum rather than a 0.1 degree grid point.
    """
    pts = np.asarray(points, dtype=float)

    def areas(angles):
        c, s = np.cos(angles), np.sin(angles)
        u = pts[:, 0:1] * c + pts[:, 1:2] * s
        v = -pts[:, 0:1] * s + pts[:, 1:2] * c
        return (u.max(0) - u.min(0)) * (v.max(0) - v.min(0))

    angles = np.deg2rad(np.arange(0.0, 90.0, step_deg))
    a = areas(angles)
    best = float(a.min())
    if refine:
        k = int(np.argmin(a))
        fine = angles[k] + np.deg2rad(np.linspace(-step_deg, step_deg, 20001))
        best = min(best, float(areas(fine).min()))
    return best


def rect_corners(cx, cy, w, h, angle):
    c, s = math.cos(angle), math.sin(angle)
    out = []
    for dx, dy in ((-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)):
        out.append((cx + dx * c - dy * s, cy + dx * s + dy * c))
    return np.array(out)


def random_convex_quad(rng, scale=1.0):
    """Four points at sorted random angles on a random ellipse: always convex."""
    while True:
        angles = np.sort(rng.uniform(0, 2 * np.pi, 4))
        gaps = np.diff(np.concatenate([angles, angles[:1] + 2 * np.pi]))
        if gaps.max() < np.pi - 0.05:
            break
    a, b = rng.uniform(0.3, 1.0, 2) * scale
    rot = rng.uniform(0, np.pi)
    x = a * np.cos(angles)
    y = b * np.sin(angles)
    c, s = np.cos(rot), np.sin(rot)
    return np.stack([x * c - y * s, x * s + y * c], axis=1) + rng.uniform(-1, 1, 2) * scale


def brute_force_matching(iou):
    """Injective GT -> default assignment maximizing the sorted IOU vector lexicographically."""
    g, d = iou.shape
    best = None
    best_key = None
    for perm in itertools.permutations(range(d), g):
        vals = sorted((iou[j, perm[j]] for j in range(g)), reverse=True)
        key = tuple(vals)
        if best_key is None or key > best_key:
            best, best_key = perm, key
    return {j: best[j] for j in range(g)}


def brute_force_ap(scores, is_tp, n_gt):
    """All-points AP by enumerating every recall level of the PR curve."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    prec, rec = [], []
    tp = 0
    for rank, i in enumerate(order, start=1):
        tp += is_tp[i]
        prec.append(tp / rank)
        rec.append(tp / n_gt)
    ap = 0.0
    prev_r = 0.0
    for k in range(len(order)):
        if rec[k] > prev_r:
            # interpolated precision: best precision at any recall >= this one
            ap += (rec[k] - prev_r) * max(prec[k:])
            prev_r = rec[k]
    return ap


def brute_force_nms(boxes, scores, classes, thr, iou_fn):
    """Exhaustive NMS: the unique subset S where a box is in S iff no higher-ranked
    same-class member of S overlaps it above ``thr``."""
    n = len(scores)
    rank = {i: r for r, i in enumerate(sorted(range(n), key=lambda i: (-scores[i], i)))}
    found = []
    for mask in range(1 << n):
        s = [i for i in range(n) if mask >> i & 1]
        ok = True
        for i in range(n):
            blocked = any(
                rank[j] < rank[i] and classes[j] == classes[i] and iou_fn(boxes[j], boxes[i]) > thr
                for j in s
            )
            if (i in s) == blocked:
                ok = False
                break
        if ok:
            found.append(s)
    assert len(found) == 1
    return found[0]


def central_difference(f, x, step=1e-5):
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        fp = f(x)
        flat[i] = orig - step
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * step)
    return g
