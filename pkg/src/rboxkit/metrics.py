"""Detection post-processing and evaluation."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .geometry import (
    AxisBox,
    ConvexPolygon,
    OrientedBox,
    RBoxCode,
    decode_rbox,
    enclosing_axis_box,
    iou_axis,
    iou_oriented,
    min_area_rect,
)


@dataclass(frozen=True)
class Detection:
    image_id: str
    class_id: int
    score: float
    box: AxisBox
    rbox: OrientedBox | None = None
    code: RBoxCode | None = None

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.class_id < 1:
            raise ValueError(f"class_id must be >= 1 (0 is background), got {self.class_id}")
        if self.rbox is not None and self.code is not None:
            raise ValueError("a detection carries either an rbox or a code, not both")

    def oriented(self) -> OrientedBox:
        """Rotated box for this detection; codes decode with the biggest-RBox rule."""
        if self.rbox is not None:
            return self.rbox
        if self.code is not None:
            return biggest_rbox(self.box, self.code)
        return self.box.to_oriented()


@dataclass(frozen=True)
class GroundTruthObject:
    image_id: str
    class_id: int
    quad: ConvexPolygon
    rbox: OrientedBox
    bbox: AxisBox

    @classmethod
    def from_quad(cls, image_id: str, class_id: int, quad) -> "GroundTruthObject":
        poly = quad if isinstance(quad, ConvexPolygon) else ConvexPolygon(quad)
        rbox = min_area_rect(poly)
        return cls(image_id, class_id, poly, rbox, enclosing_axis_box(rbox))


@dataclass
class ClassRow:
    class_id: int
    n_gt: int
    n_det: int
    tp: int
    fp: int
    fn: int
    recall: float
    precision: float
    ap: float
    miou: float
    mriou: float | None = None
    name: str | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass
class EvalReport:
    rows: list[ClassRow]
    recall: float
    precision: float
    map: float
    miou: float
    mriou: float | None = None
    tp: int = 0
    fp: int = 0
    fn: int = 0
    matches: list[tuple[int, int, float]] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {
            "rows": [r.as_dict() for r in self.rows],
            "recall": self.recall,
            "precision": self.precision,
            "map": self.map,
            "miou": self.miou,
            "mriou": self.mriou,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
        }


def filter_confidence(dets: Sequence[Detection], threshold: float = 0.7) -> list[Detection]:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    return [d for d in dets if d.score >= threshold]


def nms(dets: Sequence[Detection], iou_threshold: float = 0.45, use_rbox: bool = False) -> list[Detection]:
    """Greedy per-class suppression; survivors keep their input order.

    Within an image and class the highest score is kept and every remaining
    detection overlapping it by more than ``iou_threshold`` is dropped.  Equal
    scores keep the lower index first.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    groups: dict[tuple[str, int], list[int]] = defaultdict(list)
    for i, d in enumerate(dets):
        groups[(d.image_id, d.class_id)].append(i)
    keep = []
    for idx in groups.values():
        order = sorted(idx, key=lambda i: (-dets[i].score, i))
        shapes = {i: dets[i].oriented() for i in order} if use_rbox else None
        alive = []
        for i in order:
            ok = True
            for j in alive:
                o = iou_oriented(shapes[j], shapes[i]) if use_rbox else iou_axis(dets[j].box, dets[i].box)
                if o > iou_threshold:
                    ok = False
                    break
            if ok:
                alive.append(i)
        keep.extend(alive)
    return [dets[i] for i in sorted(keep)]


def average_precision(recall: np.ndarray, precision: np.ndarray, mode: str = "all") -> float:
    """Area under the interpolated PR curve.

    ``mode="all"`` integrates the precision envelope over every recall change;
    ``mode="11point"`` averages the envelope at recall 0, 0.1, ..., 1.
    """
    recall = np.asarray(recall, dtype=float)
    precision = np.asarray(precision, dtype=float)
    if recall.size == 0:
        return 0.0
    if mode == "11point":
        return float(np.mean([precision[recall >= t].max() if np.any(recall >= t) else 0.0 for t in np.linspace(0, 1, 11)]))
    if mode != "all":
        raise ValueError(f"unknown AP mode {mode!r}")
    mrec = np.concatenate([[0.0], recall, [1.0]])
    mpre = np.concatenate([[0.0], precision, [0.0]])
    mpre = np.maximum.accumulate(mpre[::-1])[::-1]
    steps = np.flatnonzero(mrec[1:] != mrec[:-1])
    return float(np.sum((mrec[steps + 1] - mrec[steps]) * mpre[steps + 1]))


def evaluate(
    dets: Sequence[Detection],
    gts: Sequence[GroundTruthObject],
    iou_threshold: float = 0.5,
    use_rbox: bool = False,
    classes: Iterable[int] | None = None,
    ap_mode: str = "all",
    class_names: dict[int, str] | None = None,
) -> EvalReport:
    """Per-class detection metrics plus their unweighted class means.

    Detections are visited by descending score.  Each takes the ground truth
    of its image and class with the highest IOU; it is a true positive when
    that IOU reaches ``iou_threshold`` and the ground truth is still free,
    otherwise a false positive.  With ``use_rbox`` the IOU is the rotated-box
    IOU and the mean over true positives is reported as mRIOU next to the
    axis-box mIOU.
    """
    if classes is None:
        class_ids = sorted({g.class_id for g in gts} | {d.class_id for d in dets})
    else:
        class_ids = sorted(set(classes))
        known = set(class_ids)
        offenders = sorted({g.class_id for g in gts if g.class_id not in known} | {d.class_id for d in dets if d.class_id not in known})
        if offenders:
            raise ValueError(f"unknown class ids: {offenders}")

    gt_index = {id(g): k for k, g in enumerate(gts)}
    rows = []
    all_matches = []
    for c in class_ids:
        cg = [g for g in gts if g.class_id == c]
        by_image: dict[str, list[GroundTruthObject]] = defaultdict(list)
        for g in cg:
            by_image[g.image_id].append(g)
        cd = [(k, d) for k, d in enumerate(dets) if d.class_id == c]
        cd.sort(key=lambda kd: (-kd[1].score, kd[0]))
        taken: set[int] = set()
        flags = []
        axis_ious, rot_ious = [], []
        for k, d in cd:
            best, best_g = -1.0, None
            cands = by_image.get(d.image_id, ())
            shape = d.oriented() if use_rbox else None
            for g in cands:
                o = iou_oriented(shape, g.rbox) if use_rbox else iou_axis(d.box, g.bbox)
                if o > best:
                    best, best_g = o, g
            if best_g is not None and best >= iou_threshold and id(best_g) not in taken:
                taken.add(id(best_g))
                flags.append(1)
                axis_ious.append(iou_axis(d.box, best_g.bbox))
                if use_rbox:
                    rot_ious.append(best)
                all_matches.append((k, gt_index[id(best_g)], best))
            else:
                flags.append(0)
        tp_cum = np.cumsum(flags) if flags else np.zeros(0)
        n_gt = len(cg)
        tp = int(sum(flags))
        fp = len(flags) - tp
        rec_curve = tp_cum / n_gt if n_gt else np.zeros_like(tp_cum, dtype=float)
        prec_curve = tp_cum / np.arange(1, len(flags) + 1) if flags else np.zeros(0)
        rows.append(
            ClassRow(
                class_id=c,
                n_gt=n_gt,
                n_det=len(flags),
                tp=tp,
                fp=fp,
                fn=n_gt - tp,
                recall=tp / n_gt if n_gt else 0.0,
                precision=tp / len(flags) if flags else 0.0,
                ap=average_precision(rec_curve, prec_curve, ap_mode) if n_gt else 0.0,
                miou=float(np.mean(axis_ious)) if axis_ious else 0.0,
                mriou=(float(np.mean(rot_ious)) if rot_ious else 0.0) if use_rbox else None,
                name=(class_names or {}).get(c),
            )
        )

    def avg(attr):
        return float(np.mean([getattr(r, attr) for r in rows])) if rows else 0.0

    return EvalReport(
        rows=rows,
        recall=avg("recall"),
        precision=avg("precision"),
        map=avg("ap"),
        miou=avg("miou"),
        mriou=avg("mriou") if use_rbox else None,
        tp=sum(r.tp for r in rows),
        fp=sum(r.fp for r in rows),
        fn=sum(r.fn for r in rows),
        matches=all_matches,
    )


def format_eval_table(report: EvalReport, title: str | None = None) -> str:
    cols = ["Class", "#GT", "#Det", "TP", "FP", "FN", "R", "P", "AP", "mIOU"]
    if report.mriou is not None:
        cols.append("mRIOU")
    body = []
    for r in report.rows:
        row = [r.name or str(r.class_id), str(r.n_gt), str(r.n_det), str(r.tp), str(r.fp), str(r.fn)]
        row += [f"{v:.4f}" for v in (r.recall, r.precision, r.ap, r.miou)]
        if report.mriou is not None:
            row.append(f"{r.mriou:.4f}")
        body.append(row)
    avg = ["average", "", "", str(report.tp), str(report.fp), str(report.fn)]
    avg += [f"{v:.4f}" for v in (report.recall, report.precision, report.map, report.miou)]
    if report.mriou is not None:
        avg.append(f"{report.mriou:.4f}")
    widths = [max(len(x[i]) for x in [cols] + body + [avg]) for i in range(len(cols))]

    def fmt(row):
        return "  ".join(v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(row, widths)))

    lines = [fmt(cols), "-" * len(fmt(cols))] + [fmt(r) for r in body] + ["-" * len(fmt(cols)), fmt(avg)]
    if title:
        lines.insert(0, title)
    return "\n".join(lines)


def mae(pred: Sequence[float], gt: Sequence[float]) -> float:
    p = np.asarray(pred, dtype=float).ravel()
    g = np.asarray(gt, dtype=float).ravel()
    if p.shape != g.shape:
        raise ValueError(f"length mismatch: {p.size} vs {g.size}")
    if p.size == 0:
        raise ValueError("mae of empty sequences")
    return float(np.mean(np.abs(p - g)))


def biggest_rbox(crop: AxisBox, code: RBoxCode) -> OrientedBox:
    """Decode a code; for two-term codes keep the larger-area candidate (first on ties)."""
    cands = decode_rbox(crop, code)
    best = cands[0]
    for c in cands[1:]:
        if c.area > best.area:
            best = c
    return best


def mriou_of_variant(pred_codes: Sequence[RBoxCode], crops: Sequence[AxisBox], gt_rboxes: Sequence[OrientedBox]) -> float:
    """Mean rotated IOU of already-matched (code, crop, ground-truth) triples."""
    if not (len(pred_codes) == len(crops) == len(gt_rboxes)):
        raise ValueError("pred_codes, crops and gt_rboxes must have equal lengths")
    if not pred_codes:
        return 0.0
    vals = [iou_oriented(biggest_rbox(b, c), g) for c, b, g in zip(pred_codes, crops, gt_rboxes)]
    return float(math.fsum(vals) / len(vals))
