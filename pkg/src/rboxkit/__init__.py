"""Building blocks for two-stage oriented-box detection on numpy."""

__version__ = "0.1.0"

from .geometry import (
    AxisBox,
    ConvexPolygon,
    GeometryError,
    OrientedBox,
    RBoxCode,
    decode_rbox,
    encode_rbox,
    enclosing_axis_box,
    iou_axis,
    iou_oriented,
    min_area_rect,
)
from .metrics import Detection, GroundTruthObject, evaluate, nms

__all__ = [
    "AxisBox",
    "ConvexPolygon",
    "Detection",
    "GeometryError",
    "GroundTruthObject",
    "OrientedBox",
    "RBoxCode",
    "decode_rbox",
    "encode_rbox",
    "enclosing_axis_box",
    "evaluate",
    "iou_axis",
    "iou_oriented",
    "min_area_rect",
    "nms",
]
