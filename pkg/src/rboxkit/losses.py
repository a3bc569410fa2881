"""Loss kernels for the two detector stages, each with its analytic gradient.

Scalar kernels accept floats or arrays and work elementwise.  Batch sums are
plain left-to-right numpy reductions on float64, so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .geometry import RBoxCode


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 1.0
    negative_ratio: float = 3.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.negative_ratio > 0:
            raise ValueError(f"negative_ratio must be positive, got {self.negative_ratio}")


def smooth_l1(x):
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = np.where(ax < 1.0, 0.5 * x * x, ax - 0.5)
    return out if out.ndim else float(out)


def smooth_l1_grad(x):
    """-1 for x <= -1, x for -1 < x <= 1, 1 for x > 1."""
    x = np.asarray(x, dtype=float)
    out = np.clip(x, -1.0, 1.0)
    return out if out.ndim else float(out)


def smooth_ln(x):
    ax = np.abs(np.asarray(x, dtype=float))
    out = (ax + 1.0) * np.log1p(ax) - ax
    return out if out.ndim else float(out)


def smooth_ln_grad(x):
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.log1p(np.abs(x))
    return out if out.ndim else float(out)


def mse(y, y_star, mean: bool = False) -> float:
    """Squared Euclidean distance ``||y - y*||^2``; ``mean=True`` divides by the length."""
    y = np.asarray(y, dtype=float).ravel()
    y_star = np.asarray(y_star, dtype=float).ravel()
    if y.shape != y_star.shape:
        raise ValueError(f"length mismatch: {y.size} vs {y_star.size}")
    d = y - y_star
    s = float(d @ d)
    return s / d.size if mean and d.size else s


def mse_grad(y, y_star, mean: bool = False) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    y_star = np.asarray(y_star, dtype=float).ravel()
    if y.shape != y_star.shape:
        raise ValueError(f"length mismatch: {y.size} vs {y_star.size}")
    g = 2.0 * (y - y_star)
    return g / g.size if mean and g.size else g


def softmax(logits) -> np.ndarray:
    """Softmax along the last axis with max subtraction."""
    z = np.asarray(logits, dtype=float)
    if z.size == 0:
        raise ValueError("softmax of an empty vector")
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def _class_targets(n_boxes: int, n_classes: int, matches, labels, selected_negatives) -> dict[int, int]:
    labels = [int(c) for c in labels]
    bad = [c for c in labels if not 0 < c < n_classes]
    if bad:
        raise ValueError(f"labels out of range 1..{n_classes - 1}: {sorted(set(bad))}")
    targets: dict[int, int] = {}
    for j, i in matches.pairs:
        targets[int(i)] = labels[j]
    for i in sorted(selected_negatives):
        if i in targets:
            raise ValueError(f"default box {i} is both positive and a selected negative")
        if not 0 <= i < n_boxes:
            raise ValueError(f"negative index {i} out of range")
        targets[int(i)] = 0
    return targets


def classification_loss(confidences, matches, labels: Sequence[int], selected_negatives: Iterable[int]) -> float:
    """Softmax cross-entropy over positives (true class) and selected negatives (background).

    ``confidences`` is an (n_boxes, n_classes) logit array, class 0 being
    background; ``labels`` holds one class id per ground truth.
    """
    c = np.asarray(confidences, dtype=float)
    targets = _class_targets(c.shape[0], c.shape[1], matches, labels, selected_negatives)
    if not targets:
        return 0.0
    idx = np.fromiter(targets.keys(), dtype=int)
    cls = np.fromiter(targets.values(), dtype=int)
    logp = log_softmax(c[idx])
    return float(-np.sum(logp[np.arange(len(idx)), cls]))


def classification_loss_grad(confidences, matches, labels, selected_negatives) -> np.ndarray:
    c = np.asarray(confidences, dtype=float)
    targets = _class_targets(c.shape[0], c.shape[1], matches, labels, selected_negatives)
    g = np.zeros_like(c)
    if not targets:
        return g
    idx = np.fromiter(targets.keys(), dtype=int)
    cls = np.fromiter(targets.values(), dtype=int)
    p = softmax(c[idx])
    p[np.arange(len(idx)), cls] -= 1.0
    g[idx] = p
    return g


def _delta_array(d) -> np.ndarray:
    if len(d) and hasattr(d[0], "as_tuple"):
        d = [x.as_tuple() for x in d]
    return np.asarray(d, dtype=float).reshape(-1, 4)


def regression_loss(deltas_pred, deltas_gt) -> float:
    """Sum of SmoothL1 over positives and the four box-delta components."""
    p = _delta_array(deltas_pred)
    g = _delta_array(deltas_gt)
    if p.shape != g.shape:
        raise ValueError(f"count mismatch: {len(p)} predicted vs {len(g)} ground-truth deltas")
    return float(np.sum(smooth_l1(p - g)))


def regression_loss_grad(deltas_pred, deltas_gt) -> np.ndarray:
    p = _delta_array(deltas_pred)
    g = _delta_array(deltas_gt)
    if p.shape != g.shape:
        raise ValueError(f"count mismatch: {len(p)} predicted vs {len(g)} ground-truth deltas")
    return smooth_l1_grad(p - g)


def ssd_total_loss(cls: float, reg: float, n_matched: int, cfg: LossConfig = LossConfig()) -> float:
    """(cls + alpha * reg) / N; an image without matches contributes 0."""
    if n_matched < 0:
        raise ValueError("n_matched must be non-negative")
    if n_matched == 0:
        return 0.0
    return (cls + cfg.alpha * reg) / n_matched


def _code_array(codes):
    if isinstance(codes, np.ndarray):
        return codes.astype(float)
    codes = list(codes)
    if not codes:
        return np.zeros((0, 2))
    if isinstance(codes[0], RBoxCode):
        widths = {c.variant for c in codes}
        if len(widths) != 1:
            raise ValueError("mixed 2-term and 3-term codes")
        return np.asarray([c.as_tuple() for c in codes], dtype=float)
    return np.asarray(codes, dtype=float)


def rbox_loss(pred, gt) -> float:
    """Half the mean squared Euclidean error between predicted and true codes.

    Two-term codes have no h component and it contributes nothing.
    """
    p = _code_array(pred)
    g = _code_array(gt)
    if p.shape != g.shape:
        raise ValueError(f"variant or count mismatch: {p.shape} vs {g.shape}")
    n = len(p)
    if n == 0:
        return 0.0
    d = p - g
    return float(np.sum(d * d) / (2 * n))


def rbox_loss_grad(pred, gt) -> np.ndarray:
    p = _code_array(pred)
    g = _code_array(gt)
    if p.shape != g.shape:
        raise ValueError(f"variant or count mismatch: {p.shape} vs {g.shape}")
    n = len(p)
    return (p - g) / n if n else np.zeros_like(p)
