import math

import numpy as np
import pytest

from oracles import brute_force_ap, brute_force_nms, rect_corners
from rboxkit.geometry import AxisBox, OrientedBox, RBoxCode, decode_rbox, encode_rbox, enclosing_axis_box, iou_axis, iou_oriented
from rboxkit.metrics import (
    Detection,
    GroundTruthObject,
    average_precision,
    biggest_rbox,
    evaluate,
    filter_confidence,
    format_eval_table,
    mae,
    mriou_of_variant,
    nms,
)


def det(box, score, cls=1, image="a", **kw):
    return Detection(image, cls, score, AxisBox(*box), **kw)


def gt(quad, cls=1, image="a"):
    return GroundTruthObject.from_quad(image, cls, quad)


def square(cx, cy, s):
    return [(cx - s / 2, cy - s / 2), (cx + s / 2, cy - s / 2), (cx + s / 2, cy + s / 2), (cx - s / 2, cy + s / 2)]


def test_filter_confidence():
    ds = [det((0, 0, 1, 1), 0.9), det((0, 0, 1, 1), 0.5), det((0, 0, 1, 1), 1.0)]
    assert [d.score for d in filter_confidence(ds, 0.7)] == [0.9, 1.0]
    assert filter_confidence(ds, 0.0) == ds
    assert [d.score for d in filter_confidence(ds, 1.0)] == [1.0]


def test_detection_validation():
    with pytest.raises(ValueError):
        det((0, 0, 1, 1), 1.5)
    with pytest.raises(ValueError):
        det((0, 0, 1, 1), 0.5, cls=0)


def test_nms_examples():
    a, b = det((0, 0, 2, 2), 0.9), det((0, 0, 2, 2), 0.8)
    assert nms([b, a]) == [a]
    far = [det((0, 0, 1, 1), 0.5), det((5, 5, 1, 1), 0.6), det((10, 0, 1, 1), 0.7)]
    assert nms(far) == far
    # other class or other image is never suppressed
    assert len(nms([a, det((0, 0, 2, 2), 0.8, cls=2), det((0, 0, 2, 2), 0.8, image="b")])) == 3


def test_nms_matches_exhaustive_oracle():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(2, 7))
        xs = np.cumsum(rng.uniform(0.2, 0.9, n))  # chains of overlapping boxes
        ds = [det((xs[i], rng.uniform(0, 0.3), 1.0, 1.0), float(rng.choice([0.3, 0.5, 0.7, 0.9])), cls=int(rng.integers(1, 3))) for i in range(n)]
        got = nms(ds, 0.3)
        expected = brute_force_nms([d.box for d in ds], [d.score for d in ds], [d.class_id for d in ds], 0.3, iou_axis)
        assert got == [ds[i] for i in expected]
        for i, x in enumerate(got):
            for y in got[i + 1 :]:
                assert x.class_id != y.class_id or iou_axis(x.box, y.box) <= 0.3


def test_evaluate_perfect():
    gts = [gt(square(5, 5, 2)), gt(rect_corners(20, 20, 6, 2, 0.4), cls=2), gt(square(40, 5, 3), image="b")]
    dets = [Detection(g.image_id, g.class_id, 1.0, g.bbox, rbox=g.rbox) for g in gts]
    r = evaluate(dets, gts, use_rbox=True)
    assert (r.recall, r.precision, r.map, r.miou, r.mriou) == (1.0, 1.0, 1.0, 1.0, 1.0)
    r = evaluate(dets, gts)
    assert (r.recall, r.precision, r.map, r.miou) == (1.0, 1.0, 1.0, 1.0)


def test_evaluate_no_predictions():
    r = evaluate([], [gt(square(5, 5, 2)), gt(square(9, 9, 2), cls=2)])
    assert r.recall == 0 and r.precision == 0 and r.map == 0
    assert all(row.fn == row.n_gt for row in r.rows)


def test_evaluate_three_boxes_one_fp_against_enumeration():
    gts = [gt(square(0, 0, 2)), gt(square(10, 0, 2)), gt(square(20, 0, 2))]
    dets = [
        det((0, 0, 2, 2), 0.9),
        det((50, 50, 2, 2), 0.8),  # false positive
        det((10, 0, 2, 2), 0.7),
        det((20.2, 0, 2, 2), 0.6),
    ]
    r = evaluate(dets, gts)
    row = r.rows[0]
    assert (row.tp, row.fp, row.fn) == (3, 1, 0)
    expected = brute_force_ap([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 1], 3)
    # by hand: recall steps 1/3 @ P=1, then 2/3 and 1 @ P=3/4
    assert expected == pytest.approx(1 / 3 + 2 / 3 * 0.75, abs=1e-15)
    assert row.ap == pytest.approx(expected, abs=1e-15)


def test_ap_against_enumeration_random():
    rng = np.random.default_rng(1)
    for _ in range(300):
        n = int(rng.integers(1, 12))
        scores = list(rng.permutation(n) / n)
        flags = list(rng.integers(0, 2, n))
        n_gt = max(1, sum(flags) + int(rng.integers(0, 3)))
        order = sorted(range(n), key=lambda i: (-scores[i], i))
        tp = np.cumsum([flags[i] for i in order])
        ap = average_precision(tp / n_gt, tp / np.arange(1, n + 1))
        assert ap == pytest.approx(brute_force_ap(scores, flags, n_gt), abs=1e-12)


def test_ap_eleven_point_mode():
    ap = average_precision(np.array([0.5, 1.0]), np.array([1.0, 0.5]), mode="11point")
    assert ap == pytest.approx((6 * 1.0 + 5 * 0.5) / 11, abs=1e-15)


def test_evaluate_duplicate_detection_is_fp():
    gts = [gt(square(0, 0, 2))]
    r = evaluate([det((0, 0, 2, 2), 0.9), det((0.1, 0, 2, 2), 0.95)], gts)
    row = r.rows[0]
    assert (row.tp, row.fp) == (1, 1)
    assert row.miou == pytest.approx(iou_axis(AxisBox(0.1, 0, 2, 2), AxisBox(0, 0, 2, 2)))


def test_evaluate_counts_invariant_and_ranking_invariance():
    rng = np.random.default_rng(2)
    gts = [gt(square(*rng.uniform(0, 100, 2), rng.uniform(5, 15)), cls=int(rng.integers(1, 4))) for _ in range(30)]
    dets = []
    for g in gts:
        if rng.uniform() < 0.8:
            b = g.bbox
            dets.append(det((b.cx + rng.normal(0, 2), b.cy + rng.normal(0, 2), b.w, b.h), float(rng.uniform()), cls=g.class_id))
    dets += [det((*rng.uniform(0, 100, 2), 10, 10), float(rng.uniform()), cls=int(rng.integers(1, 4))) for _ in range(10)]
    r = evaluate(dets, gts)
    for row in r.rows:
        assert row.tp + row.fn == sum(g.class_id == row.class_id for g in gts)
        assert row.tp + row.fp == sum(d.class_id == row.class_id for d in dets)
    squashed = [Detection(d.image_id, d.class_id, d.score**3, d.box) for d in dets]
    r2 = evaluate(squashed, gts)
    assert [x.ap for x in r.rows] == [x.ap for x in r2.rows]


def test_evaluate_unknown_class():
    with pytest.raises(ValueError, match=r"\[7\]"):
        evaluate([det((0, 0, 1, 1), 0.9, cls=7)], [gt(square(0, 0, 1))], classes=[1, 2])


def test_format_eval_table():
    gts = [gt(square(5, 5, 2))]
    r = evaluate([det((5, 5, 2, 2), 1.0)], gts, use_rbox=True, class_names={1: "label"})
    text = format_eval_table(r)
    assert "label" in text and "mRIOU" in text and "average" in text


def test_mae():
    assert mae([1, 2], [1, 2]) == 0.0
    assert mae([0.2], [0.1]) == pytest.approx(0.1, abs=1e-15)
    rng = np.random.default_rng(3)
    a, b, c = rng.normal(size=(3, 20))
    p = rng.permutation(20)
    assert mae(a[p], b[p]) == pytest.approx(mae(a, b), abs=1e-15)
    assert mae(a, c) <= mae(a, b) + mae(b, c) + 1e-15
    with pytest.raises(ValueError):
        mae([], [])
    with pytest.raises(ValueError):
        mae([1], [1, 2])


def test_mriou_of_variant_examples():
    r = OrientedBox(rect_corners(10, 10, 8, 3, 0.5))
    b = enclosing_axis_box(r)
    code = encode_rbox(r, b)
    assert mriou_of_variant([code], [b], [r]) == pytest.approx(1.0, abs=1e-12)
    sq = OrientedBox(rect_corners(0, 0, 2, 2, math.pi / 4))
    bb = enclosing_axis_box(sq)
    assert mriou_of_variant([RBoxCode(0, 0)], [bb], [sq]) == pytest.approx(iou_oriented(bb.to_oriented(), sq), abs=1e-12)


def test_mriou_of_variant_recomputation():
    rng = np.random.default_rng(4)
    codes, crops, gts_ = [], [], []
    for _ in range(100):
        codes.append(RBoxCode(*rng.uniform(0.05, 0.95, 2)))
        crops.append(AxisBox(*rng.uniform(0, 10, 2), *rng.uniform(1, 5, 2)))
        gts_.append(OrientedBox(rect_corners(*rng.uniform(0, 10, 2), *rng.uniform(1, 5, 2), rng.uniform(0, 3))))
    direct = []
    for c, b, g in zip(codes, crops, gts_):
        cands = decode_rbox(b, c)
        big = max(cands, key=lambda o: (o.area, -cands.index(o)))
        direct.append(iou_oriented(big, g))
    assert mriou_of_variant(codes, crops, gts_) == pytest.approx(np.mean(direct), abs=1e-12)


def test_biggest_rbox_picks_larger_candidate():
    # chirality 1: side (0,1)->(4,0), |u|^2 = 17, bottom edge binds at t = 0.75|u| -> 12.75
    # chirality 2: side (2.5,0)->(10,1.6), |u|^2 = 58.81, bottom edge binds at t = 0.32|u| -> 18.8192
    b = AxisBox.from_corners(0, 0, 10, 4)
    assert biggest_rbox(b, RBoxCode(0.25, 0.4)).area == pytest.approx(18.8192, abs=1e-9)
    assert biggest_rbox(b, RBoxCode(0.25, 0.4, 1.0)).area == pytest.approx(12.75, abs=1e-9)
