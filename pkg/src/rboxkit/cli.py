"""Command line entry point: generate, simulate, cluster, encode, evaluate, bench.

Exit codes: 0 success, 1 internal failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .anchors import BoxShape, DefaultBoxSet, default_box_array, format_report, kmeans_shapes, miou_report, ssd_baseline_shapes
from .encoding import build_rbox_targets, encode_deltas, match_boxes, rbox_target, select_hard_negatives
from .fileio import (
    ImageRecord,
    InputError,
    PredictionRecord,
    dumps,
    read_annotations,
    read_centroids,
    read_predictions,
    write_annotations,
    write_centroids,
    write_predictions,
)
from .geometry import OrientedBox, iou_matrix, iou_oriented
from .metrics import evaluate, filter_confidence, format_eval_table, mae, nms
from .synthdata import CapacityError, SceneSpec, apply_approach, corrupt_predictions, generate_dataset, render_scene

BENCH_TARGET = 50_000
BENCH_FLOOR = 10_000


class _BadInput(Exception):
    pass


def _fail(msg: str):
    raise _BadInput(msg)


def _approach(images: list[ImageRecord], mode: str) -> list[ImageRecord]:
    return [ImageRecord(im.image_id, im.width, im.height, apply_approach(im.objects, mode)) for im in images]


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    try:
        spec_dict = json.loads(Path(args.spec).read_text())
    except OSError as e:
        _fail(f"cannot read spec {args.spec}: {e.strerror or e}")
    except json.JSONDecodeError as e:
        _fail(f"spec {args.spec} is not valid JSON: {e.msg}")
    if not isinstance(spec_dict, dict):
        _fail("spec must be a JSON object")
    try:
        spec = SceneSpec.from_dict(spec_dict)
        n_images = int(spec_dict.get("images", 1))
    except (TypeError, ValueError) as e:
        _fail(f"invalid spec: {e}")
    seed = spec.seed if args.seed is None else args.seed
    try:
        scenes = generate_dataset(spec, n_images, seed=seed)
    except CapacityError as e:
        _fail(str(e))
    write_annotations(args.out, spec.class_names, scenes)
    if args.raster:
        out_dir = Path(args.raster)
        out_dir.mkdir(parents=True, exist_ok=True)
        for s in scenes:
            render_scene(s).save(out_dir / f"{s.image_id}.png")
    counts = {name: 0 for name in spec.class_names}
    for s in scenes:
        for o in s.objects:
            counts[spec.class_names[o.class_id - 1]] += 1
    print(f"wrote {n_images} image(s) to {args.out}")
    for name, c in counts.items():
        print(f"  {name}: {c}")
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    classes, images = read_annotations(args.annotations)
    images = _approach(images, args.mode)
    score = tuple(args.score) if len(args.score) == 2 else args.score[0]
    dets = corrupt_predictions(images, args.drop, args.jitter, score, seed=args.seed)
    by_image: dict[str, list] = {im.image_id: [] for im in images}
    for d in dets:
        if args.form == "code":
            code = rbox_target(d.rbox, d.box)
            d = type(d)(d.image_id, d.class_id, d.score, d.box, code=code)
        elif args.form == "bbox":
            d = type(d)(d.image_id, d.class_id, d.score, d.box)
        by_image[d.image_id].append(d)
    write_predictions(args.out, classes, [PredictionRecord(k, v) for k, v in by_image.items()])
    print(f"wrote {len(dets)} detection(s) for {len(images)} image(s) to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# cluster


def _normalized_shapes(images: list[ImageRecord]) -> np.ndarray:
    rows = []
    for im in images:
        for o in im.objects:
            rows.append((min(1.0, o.bbox.w / im.width), min(1.0, o.bbox.h / im.height)))
    return np.asarray(rows, dtype=float).reshape(-1, 2)


def cmd_cluster(args) -> int:
    _, images = read_annotations(args.annotations)
    shapes = _normalized_shapes(_approach(images, args.mode))
    if len(shapes) == 0:
        _fail("annotations contain no objects")
    distinct = len(np.unique(shapes, axis=0))
    ks = args.k or [4]
    bad = [k for k in ks if k < 1 or k > distinct]
    if bad:
        _fail(f"k={bad[0]} is invalid: the annotations have {distinct} distinct box shape(s)")
    candidates, sets = [], []
    if args.baseline:
        if args.baseline == "ssd":
            base = ssd_baseline_shapes()
        else:
            try:
                base = read_centroids(args.baseline)
            except InputError:
                raw = json.loads(Path(args.baseline).read_text())
                base = [BoxShape(float(w), float(h)) for w, h in raw]
        candidates.append(("Hand-picked", base))
    for k in ks:
        model = kmeans_shapes(shapes, k, seed=args.seed, restarts=args.restarts)
        candidates.append((f"K-means clustering (k={k})", model.centroids))
        sets.append({"k": k, "seed": args.seed, "miou": model.miou, "centroids": [[c.w, c.h] for c in model.centroids]})
    rows = miou_report(shapes, candidates)
    print(f"{len(shapes)} boxes, {distinct} distinct shapes")
    print(format_report(rows))
    out = args.out or str(Path(args.annotations).with_suffix(".centroids.json"))
    write_centroids(out, sets)
    print(f"centroids written to {out}")
    return 0


# ---------------------------------------------------------------------------
# encode


def _parse_grids(text: str) -> list[tuple[int, int]]:
    grids = []
    for part in text.split(","):
        try:
            r, c = part.lower().split("x")
            grids.append((int(r), int(c)))
        except ValueError:
            _fail(f"bad grid {part!r}: expected ROWSxCOLS, e.g. 38x38,19x19")
    return grids


def _hardness(defaults: np.ndarray, gts: np.ndarray) -> np.ndarray:
    # stand-in for the background loss of each default: overlap with the nearest object
    if len(gts) == 0:
        return np.zeros(len(defaults))
    return iou_matrix(defaults, gts).max(axis=1)


def cmd_encode(args) -> int:
    classes, images = read_annotations(args.annotations)
    shapes = read_centroids(args.centroids, args.k)
    box_set = DefaultBoxSet(tuple(shapes), tuple(_parse_grids(args.grids)))
    images = sorted(_approach(images, args.mode), key=lambda im: im.image_id)
    root = np.random.SeedSequence(args.seed)
    seeds = root.spawn(len(images))
    n_pos = n_neg = n_obj = 0
    matched_ious = []
    lines = [dumps({"classes": classes, "default_boxes": len(box_set), "mode": args.mode, "jitter": args.jitter, "seed": args.seed})]
    for im, ss in zip(images, seeds):
        rec = {"image_id": im.image_id, "matches": [], "negatives": [], "rbox_targets": []}
        if im.objects:
            defaults = default_box_array(box_set, (im.width, im.height))
            gts = np.asarray([o.bbox.as_tuple() for o in im.objects], dtype=float)
            m = match_boxes(gts, defaults, threshold=args.threshold)
            pairs = sorted(m.pairs, key=lambda p: (p[1], p[0]))
            deltas = encode_deltas(gts[[j for j, _ in pairs]], defaults[[i for _, i in pairs]])
            for (j, i), t in zip(pairs, deltas):
                iou = float(m.ious[j, i])
                matched_ious.append(iou)
                rec["matches"].append({"gt": j, "default": i, "class": classes[im.objects[j].class_id - 1], "iou": iou, "delta": t.tolist()})
            hard = _hardness(defaults, gts)
            neg_losses = {i: float(hard[i]) for i in sorted(m.negatives)}
            rec["negatives"] = sorted(select_hard_negatives(neg_losses, len(m.positives), args.ratio))
            seed = int(ss.generate_state(1)[0])
            targets = build_rbox_targets([o.rbox for o in im.objects], jitter=args.jitter, seed=seed, image_id=im.image_id)
            for j, t in enumerate(targets):
                rec["rbox_targets"].append({"gt": j, "crop": list(t.crop.as_tuple()), "code": list(t.code.as_tuple())})
            n_pos += len(m.positives)
            n_neg += len(rec["negatives"])
            n_obj += len(im.objects)
        lines.append(dumps(rec))
    Path(args.out).write_text("\n".join(lines) + "\n")
    mean_iou = float(np.mean(matched_ious)) if matched_ious else 0.0
    print(f"images: {len(images)}  objects: {n_obj}  default boxes/image: {len(box_set)}")
    print(f"positives: {n_pos}  hard negatives: {n_neg}  mean matched IOU: {mean_iou:.4f}")
    print(f"targets written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args) -> int:
    classes, images = read_annotations(args.annotations)
    images = _approach(images, args.mode)
    ids = {c: k for k, c in enumerate(classes, start=1)}
    try:
        pred_classes, records = read_predictions(args.predictions, ids)
    except InputError as e:
        if "unknown class" in str(e):
            pc = json.loads(Path(args.predictions).read_text().splitlines()[0]).get("classes", [])
            _fail(f"class mismatch: predictions {pc} vs annotations {classes}")
        raise
    extra = sorted(set(pred_classes) - set(classes))
    if extra:
        _fail(f"class mismatch: prediction classes {extra} are not in the annotation classes {classes}")
    known = {im.image_id for im in images}
    stray = sorted({r.image_id for r in records} - known)
    if stray:
        _fail(f"predictions reference unknown image ids: {stray[:5]}")
    gts = [o for im in sorted(images, key=lambda im: im.image_id) for o in im.objects]
    dets = [d for r in sorted(records, key=lambda r: r.image_id) for d in r.detections]
    names = dict(enumerate(classes, start=1))
    class_ids = list(range(1, len(classes) + 1))

    kept = filter_confidence(dets, args.conf)
    stages = {"pre_nms": kept, "post_nms": nms(kept, args.nms, use_rbox=args.rbox)}
    report = {"settings": {"conf": args.conf, "iou": args.iou, "nms": args.nms, "rbox": args.rbox, "mode": args.mode}}
    text = []
    for stage, ds in stages.items():
        r = evaluate(ds, gts, iou_threshold=args.iou, use_rbox=args.rbox, classes=class_ids, class_names=names)
        report[stage] = r.as_dict()
        text.append(format_eval_table(r, title=f"[{stage.replace('_', '-')}] {len(ds)} detection(s)"))
        if stage == "post_nms" and args.rbox:
            pred, ref = [], []
            for k, g, _ in r.matches:
                d = ds[k]
                if d.code is not None:
                    gcode = rbox_target(gts[g].rbox, d.box)
                    n = len(d.code.as_tuple())
                    pred.extend(d.code.as_tuple())
                    ref.extend(gcode.as_tuple()[:n])
            if pred:
                report["code_mae"] = mae(pred, ref)
                text.append(f"code MAE over {len(pred)} values: {report['code_mae']:.6f}")
    out_text = "\n\n".join(text)
    print(out_text)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=1, allow_nan=False) + "\n")
        Path(args.report).with_suffix(".txt").write_text(out_text + "\n")
    return 0


# ---------------------------------------------------------------------------
# bench


def bench_iou(n: int = 100_000, seed: int = 0) -> float:
    """Rotated-box IOU evaluations per second on overlapping random pairs."""
    rng = np.random.default_rng(seed)
    m = 1000
    boxes = [
        OrientedBox.from_center(*rng.uniform(0, 10, 2), *rng.uniform(1, 5, 2), rng.uniform(0, np.pi))
        for _ in range(2 * m)
    ]
    pairs = [(boxes[i], boxes[m + i]) for i in range(m)]
    t0 = time.perf_counter()
    done = 0
    while done < n:
        for a, b in pairs:
            iou_oriented(a, b)
        done += m
    return done / (time.perf_counter() - t0)


def cmd_bench(args) -> int:
    rate = bench_iou(args.n, args.seed)
    if rate >= BENCH_TARGET:
        status = "meets target"
    elif rate >= BENCH_FLOOR:
        status = "below target"
    else:
        status = "FAIL"
    print(f"iou_oriented: {rate:,.0f} evaluations/s (target {BENCH_TARGET:,}): {status}")
    return 1 if rate < BENCH_FLOOR else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rboxkit", description="Oriented-box detection toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic annotation file from a scene spec")
    g.add_argument("spec", help="scene spec JSON")
    g.add_argument("out", help="output annotation JSON-lines file")
    g.add_argument("--seed", type=int, default=None, help="overrides the seed in the scene file")
    g.add_argument("--raster", metavar="DIR", help="also write flat-color PNGs here")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="simulated detector output for an annotation file")
    s.add_argument("annotations")
    s.add_argument("out")
    s.add_argument("--drop", type=float, default=0.0)
    s.add_argument("--jitter", type=float, default=0.0)
    s.add_argument("--score", type=float, nargs="+", default=[1.0], help="constant score or LOW HIGH range")
    s.add_argument("--form", choices=("rbox", "code", "bbox"), default="rbox")
    s.add_argument("--mode", choices=("A", "B"), default="A")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("cluster", help="k-means default boxes and mIOU report")
    c.add_argument("annotations")
    c.add_argument("--k", type=int, action="append", help="number of clusters; repeat for a sweep (default 4)")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--restarts", type=int, default=10)
    c.add_argument("--baseline", help="'ssd' for the 10-box SSD-style set, or a JSON file of [w, h] pairs")
    c.add_argument("--mode", choices=("A", "B"), default="A")
    c.add_argument("--out", help="centroid sidecar (default: <annotations>.centroids.json)")
    c.set_defaults(func=cmd_cluster)

    e = sub.add_parser("encode", help="write matching and regression targets")
    e.add_argument("annotations")
    e.add_argument("centroids")
    e.add_argument("out")
    e.add_argument("--grids", default="38x38,19x19,10x10,5x5,3x3,1x1", help="comma-separated ROWSxCOLS feature maps")
    e.add_argument("--k", type=int, default=None, help="centroid set to use (default: first)")
    e.add_argument("--mode", choices=("A", "B"), default="A")
    e.add_argument("--jitter", type=float, default=0.1)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--ratio", type=float, default=3.0, help="negatives per positive")
    e.add_argument("--threshold", type=float, default=0.5, help="match IOU threshold")
    e.set_defaults(func=cmd_encode)

    v = sub.add_parser("evaluate", help="recall, precision, mAP, mIOU (and mRIOU)")
    v.add_argument("annotations")
    v.add_argument("predictions")
    v.add_argument("--conf", type=float, default=0.7)
    v.add_argument("--iou", type=float, default=0.5)
    v.add_argument("--nms", type=float, default=0.45)
    v.add_argument("--rbox", action="store_true", help="rotated-box IOU; adds mRIOU")
    v.add_argument("--mode", choices=("A", "B"), default="A")
    v.add_argument("--report", help="structured JSON report path; text goes next to it as .txt")
    v.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("bench", help="iou_oriented throughput")
    b.add_argument("--n", type=int, default=100_000)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (_BadInput, InputError, CapacityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
