"""
Coding a rotated box inside its axis box
========================================

A rotated rectangle inscribed in its axis box is described by where its
upper side meets the left and top edges (d1, d2) plus its relative height h.
Without h there are two candidate rectangles; the larger one is taken.
"""

# %%
import math

from rboxkit.encoding import build_rbox_targets
from rboxkit.geometry import OrientedBox, RBoxCode, decode_rbox, encode_rbox, enclosing_axis_box, iou_oriented
from rboxkit.metrics import biggest_rbox

# %%
r = OrientedBox.from_center(50, 40, 60, 18, math.radians(25))
b = enclosing_axis_box(r)
code = encode_rbox(r, b)
print("axis box:", tuple(round(v, 2) for v in b.as_tuple()))
print("code (d1, d2, h):", tuple(round(v, 4) for v in code.as_tuple()))
(back,) = decode_rbox(b, code)
print("decoded IOU with the original:", iou_oriented(back, r))

# %%
# Two-term code: both chiralities are valid rectangles in the box.
two = RBoxCode(code.d1, code.d2)
for cand in decode_rbox(b, two):
    print(f"candidate area {cand.area:8.2f}  IOU {iou_oriented(cand, r):.4f}")
print("biggest-box pick area:", round(biggest_rbox(b, two).area, 2))

# %%
# Training targets: the crop comes from a jittered detector box, so the
# rectangle may poke out of it; codes are still clamped to [0, 1].
quads = [r.vertices, OrientedBox.from_center(20, 20, 30, 6, 1.2).vertices]
for t in build_rbox_targets(quads, jitter=0.1, seed=3):
    print("crop", tuple(round(v, 1) for v in t.crop.as_tuple()), "code", tuple(round(v, 3) for v in t.code.as_tuple()))
