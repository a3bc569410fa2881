"""
Loss kernels and their gradients
================================

Each analytic gradient is compared with a central finite difference.
"""

# %%
import numpy as np

from rboxkit.encoding import match_boxes, select_hard_negatives
from rboxkit.geometry import AxisBox
from rboxkit.losses import (
    classification_loss,
    classification_loss_grad,
    rbox_loss,
    rbox_loss_grad,
    smooth_l1,
    smooth_l1_grad,
    smooth_ln,
)

# %%
x = np.linspace(-3, 3, 7)
print("x         ", x)
print("smooth_l1 ", smooth_l1(x))
print("d/dx      ", smooth_l1_grad(x))
print("smooth_ln ", np.round(smooth_ln(x), 4))


# %%
def fd(f, z, h=1e-6):
    g = np.zeros_like(z)
    for i in np.ndindex(z.shape):
        e = np.zeros_like(z)
        e[i] = h
        g[i] = (f(z + e) - f(z - e)) / (2 * h)
    return g


rng = np.random.default_rng(0)
gts = [AxisBox(0.3, 0.3, 0.4, 0.4)]
defaults = [AxisBox(*rng.uniform(0, 1, 2), 0.4, 0.4) for _ in range(8)]
m = match_boxes(gts, defaults)
negs = select_hard_negatives({i: float(rng.uniform()) for i in m.negatives}, len(m.positives), 3)
conf = rng.normal(size=(8, 3))
g = classification_loss_grad(conf, m, [1], negs)
print("positives", sorted(m.positives), "hard negatives", sorted(negs))
print("classification grad max error:", np.abs(g - fd(lambda z: classification_loss(z, m, [1], negs), conf)).max())

# %%
p, t = rng.uniform(0, 1, (2, 4, 3))
print("rbox loss", round(rbox_loss(p, t), 5), "grad max error:", np.abs(rbox_loss_grad(p, t) - fd(lambda z: rbox_loss(z, t), p)).max())
