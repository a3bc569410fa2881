"""JSON-lines annotation and prediction files, plus the centroid sidecar.

Every file starts with a header record ``{"classes": [...]}``; class ids are
positions in that list starting at 1.  Coordinates are absolute pixels.
Floats are written with ``repr`` precision so reruns are byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .anchors import BoxShape
from .geometry import AxisBox, GeometryError, OrientedBox, RBoxCode
from .metrics import Detection, GroundTruthObject


class InputError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass
class ImageRecord:
    image_id: str
    width: float
    height: float
    objects: list[GroundTruthObject] = field(default_factory=list)


@dataclass
class PredictionRecord:
    image_id: str
    detections: list[Detection] = field(default_factory=list)


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _points(vertices) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in vertices]


def _read_lines(path) -> list[tuple[int, dict]]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}:{n}: invalid JSON ({e.msg})") from e
        if not isinstance(rec, dict):
            raise InputError(f"{path}:{n}: expected a JSON object")
        out.append((n, rec))
    return out


def _header(path, lines) -> list[str]:
    if not lines or "classes" not in lines[0][1]:
        raise InputError(f"{path}: first record must be a class-list header {{\"classes\": [...]}}")
    classes = lines[0][1]["classes"]
    if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
        raise InputError(f"{path}: header 'classes' must be a list of strings")
    if len(set(classes)) != len(classes):
        raise InputError(f"{path}: duplicate class names in header")
    return classes


def _quad(path, n, raw) -> list[tuple[float, float]]:
    try:
        pts = [(float(x), float(y)) for x, y in raw]
    except (TypeError, ValueError) as e:
        raise InputError(f"{path}:{n}: quad must be a list of [x, y] pairs") from e
    if len(pts) != 4 or not all(math.isfinite(v) for p in pts for v in p):
        raise InputError(f"{path}:{n}: quad must have 4 finite points")
    return pts


# ---------------------------------------------------------------------------
# annotations


def write_annotations(path, class_names: Sequence[str], images: Iterable) -> None:
    """``images`` holds objects with image_id, width, height and objects."""
    lines = [dumps({"classes": list(class_names)})]
    for im in images:
        objs = [{"class": class_names[o.class_id - 1], "quad": _points(o.quad.vertices)} for o in im.objects]
        lines.append(dumps({"image_id": im.image_id, "width": float(im.width), "height": float(im.height), "objects": objs}))
    Path(path).write_text("\n".join(lines) + "\n")


def read_annotations(path) -> tuple[list[str], list[ImageRecord]]:
    lines = _read_lines(path)
    classes = _header(path, lines)
    ids = {c: k for k, c in enumerate(classes, start=1)}
    images, seen = [], set()
    for n, rec in lines[1:]:
        for key in ("image_id", "width", "height", "objects"):
            if key not in rec:
                raise InputError(f"{path}:{n}: missing field {key!r}")
        image_id = str(rec["image_id"])
        if image_id in seen:
            raise InputError(f"{path}:{n}: duplicate image_id {image_id!r}")
        seen.add(image_id)
        w, h = rec["width"], rec["height"]
        if not (isinstance(w, (int, float)) and isinstance(h, (int, float)) and w > 0 and h > 0):
            raise InputError(f"{path}:{n}: width and height must be positive numbers")
        objs = []
        for o in rec["objects"]:
            cls = o.get("class")
            if cls not in ids:
                raise InputError(f"{path}:{n}: class {cls!r} not in header {classes}")
            try:
                objs.append(GroundTruthObject.from_quad(image_id, ids[cls], _quad(path, n, o.get("quad"))))
            except GeometryError as e:
                raise InputError(f"{path}:{n}: bad quad: {e}") from e
        images.append(ImageRecord(image_id, float(w), float(h), objs))
    return classes, images


# ---------------------------------------------------------------------------
# predictions


def detection_record(d: Detection, class_names: Sequence[str]) -> dict:
    rec = {"class": class_names[d.class_id - 1], "score": float(d.score), "bbox": list(map(float, d.box.as_tuple()))}
    if d.rbox is not None:
        rec["rbox"] = _points(d.rbox.vertices)
    elif d.code is not None:
        rec["code"] = [float(v) for v in d.code.as_tuple()]
    return rec


def write_predictions(path, class_names: Sequence[str], records: Iterable[PredictionRecord]) -> None:
    lines = [dumps({"classes": list(class_names)})]
    for r in records:
        lines.append(dumps({"image_id": r.image_id, "detections": [detection_record(d, class_names) for d in r.detections]}))
    Path(path).write_text("\n".join(lines) + "\n")


def read_predictions(path, class_ids: dict[str, int] | None = None) -> tuple[list[str], list[PredictionRecord]]:
    """Read a prediction file; ``class_ids`` maps names to ids (default: header order)."""
    lines = _read_lines(path)
    classes = _header(path, lines)
    ids = class_ids or {c: k for k, c in enumerate(classes, start=1)}
    out = []
    for n, rec in lines[1:]:
        if "image_id" not in rec or "detections" not in rec:
            raise InputError(f"{path}:{n}: records need image_id and detections")
        image_id = str(rec["image_id"])
        dets = []
        for d in rec["detections"]:
            cls = d.get("class")
            if cls not in ids:
                raise InputError(f"{path}:{n}: unknown class {cls!r}")
            if "rbox" in d and "code" in d:
                raise InputError(f"{path}:{n}: a detection carries rbox or code, not both")
            try:
                bbox = AxisBox(*map(float, d["bbox"]))
                rbox = OrientedBox(_quad(path, n, d["rbox"])) if "rbox" in d else None
                code = RBoxCode(*map(float, d["code"])) if "code" in d else None
                dets.append(Detection(image_id, ids[cls], float(d["score"]), bbox, rbox=rbox, code=code))
            except (KeyError, TypeError, ValueError) as e:
                raise InputError(f"{path}:{n}: bad detection: {e}") from e
        out.append(PredictionRecord(image_id, dets))
    return classes, out


# ---------------------------------------------------------------------------
# centroid sidecar


def write_centroids(path, sets: Sequence[dict]) -> None:
    """``sets``: dicts with k, seed, miou and centroids as normalized [w, h] pairs."""
    Path(path).write_text(json.dumps({"sets": list(sets)}, indent=1, allow_nan=False) + "\n")


def read_centroids(path, k: int | None = None) -> list[BoxShape]:
    try:
        data = json.loads(Path(path).read_text())
        sets = data["sets"]
        if k is not None:
            sets = [s for s in sets if s["k"] == k]
            if not sets:
                raise InputError(f"{path}: no centroid set with k={k}")
        return [BoxShape(float(w), float(h)) for w, h in sets[0]["centroids"]]
    except InputError:
        raise
    except OSError as e:
        raise InputError(f"cannot read centroid file {path}: {e.strerror or e}") from e
    except (ValueError, KeyError, TypeError, IndexError) as e:
        raise InputError(f"unreadable centroid file {path}: {e}") from e
