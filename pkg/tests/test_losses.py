import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import central_difference
from rboxkit.encoding import MatchResult
from rboxkit.geometry import RBoxCode
from rboxkit.losses import (
    LossConfig,
    classification_loss,
    classification_loss_grad,
    mse,
    mse_grad,
    rbox_loss,
    rbox_loss_grad,
    regression_loss,
    regression_loss_grad,
    smooth_l1,
    smooth_l1_grad,
    smooth_ln,
    smooth_ln_grad,
    softmax,
    ssd_total_loss,
)


def grad_close(analytic, numeric, rel=1e-5, floor=1e-6):
    scale = np.maximum(np.abs(numeric), floor)
    return np.all(np.abs(analytic - numeric) <= rel * scale + 1e-9)


def test_smooth_l1_values():
    assert smooth_l1(0.0) == 0.0
    assert smooth_l1(0.5) == 0.125
    assert smooth_l1(2.0) == 1.5
    assert smooth_l1(-2.0) == 1.5


def test_smooth_l1_grad_values():
    assert smooth_l1_grad(0.3) == 0.3
    assert smooth_l1_grad(-5.0) == -1.0
    assert smooth_l1_grad(1.0) == 1.0
    assert smooth_l1_grad(-1.0) == -1.0
    assert smooth_l1_grad(7.0) == 1.0


def test_smooth_l1_grad_matches_finite_difference_off_kink():
    xs = np.random.default_rng(0).uniform(-4, 4, 2000)
    xs = xs[np.abs(np.abs(xs) - 1) > 1e-3]
    h = 1e-6
    fd = (smooth_l1(xs + h) - smooth_l1(xs - h)) / (2 * h)
    assert np.max(np.abs(fd - smooth_l1_grad(xs))) < 1e-6


def test_smooth_ln_values():
    assert smooth_ln(0.0) == 0.0
    assert smooth_ln(math.e - 1) == pytest.approx(1.0, abs=1e-12)
    xs = np.random.default_rng(1).uniform(-10, 10, 100)
    assert np.array_equal(smooth_ln(xs), smooth_ln(-xs))


def test_smooth_ln_smooth_at_zero():
    h = 1e-6
    # one-sided slopes meet at 0
    left = (smooth_ln(0.0) - smooth_ln(-h)) / h
    right = (smooth_ln(h) - smooth_ln(0.0)) / h
    assert abs(left) < 1e-6 and abs(right) < 1e-6
    assert smooth_ln_grad(0.0) == 0.0
    xs = np.linspace(-3, 3, 601)
    fd = (smooth_ln(xs + 1e-6) - smooth_ln(xs - 1e-6)) / 2e-6
    assert np.max(np.abs(fd - smooth_ln_grad(xs))) < 1e-6


def test_mse_values_and_errors():
    assert mse([1, 2], [1, 2]) == 0.0
    assert mse([1, 0], [0, 0]) == 1.0
    assert mse([1, 1], [0, 0]) == 2.0
    assert mse([1, 1], [0, 0], mean=True) == 1.0
    with pytest.raises(ValueError):
        mse([1], [1, 2])
    y, t = np.random.default_rng(2).normal(size=(2, 5))
    assert grad_close(mse_grad(y, t), central_difference(lambda v: mse(v, t), y))


def test_softmax_values():
    assert np.allclose(softmax([0, 0]), [0.5, 0.5], atol=0)
    assert np.allclose(softmax([1000, 1000]), [0.5, 0.5], atol=0)
    z = np.random.default_rng(3).normal(size=7)
    assert np.max(np.abs(softmax(z) - softmax(z + 123.4))) < 1e-12
    assert abs(softmax(z).sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        softmax([])


@given(st.lists(st.floats(-50, 50), min_size=1, max_size=10))
def test_softmax_properties(z):
    p = softmax(z)
    assert np.all(p > 0) and abs(p.sum() - 1) < 1e-12


def _match(pairs, n):
    pos = {i for _, i in pairs}
    return MatchResult(pairs, pos, set(range(n)) - pos, np.zeros((0, n)))


def test_classification_loss_examples():
    m = _match([(0, 0)], 3)
    conf = np.array([[-1e3, 0.0, -1e3], [0, 0, 0], [0, 0, 0]])
    assert classification_loss(conf, m, [1], set()) == pytest.approx(0.0, abs=1e-12)
    uniform = np.zeros((3, 4))
    assert classification_loss(uniform, m, [2], set()) == pytest.approx(math.log(4), abs=1e-12)
    # background term from a selected negative
    assert classification_loss(uniform, m, [2], {1, 2}) == pytest.approx(3 * math.log(4), abs=1e-12)
    with pytest.raises(ValueError):
        classification_loss(uniform, m, [4], set())
    with pytest.raises(ValueError):
        classification_loss(uniform, m, [0], set())


def test_classification_gradient_finite_difference():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n, c = 8, 4
        conf = rng.normal(size=(n, c)) * 3
        m = _match([(0, 1), (1, 5), (0, 6)], n)
        negs = {0, 3}
        labels = [1, 3]
        g = classification_loss_grad(conf, m, labels, negs)
        fd = central_difference(lambda z: classification_loss(z, m, labels, negs), conf)
        assert grad_close(g, fd)
        assert np.all(g[[2, 4, 7]] == 0)


def test_regression_loss_examples():
    t = np.random.default_rng(5).normal(size=(3, 4))
    assert regression_loss(t, t) == 0.0
    assert regression_loss([[0.5, 0, 0, 0]], [[0, 0, 0, 0]]) == 0.125
    with pytest.raises(ValueError):
        regression_loss(t, t[:2])
    p = t + np.random.default_rng(6).normal(size=t.shape)
    fd = central_difference(lambda z: regression_loss(z, t), p)
    assert grad_close(regression_loss_grad(p, t), fd)


def test_ssd_total_loss():
    assert ssd_total_loss(2.0, 1.0, 3, LossConfig(alpha=1.0)) == 1.0
    assert ssd_total_loss(2.0, 1.0, 0) == 0.0
    a = ssd_total_loss(2.0, 1.0, 2, LossConfig(alpha=1.0))
    b = ssd_total_loss(2.0, 1.0, 2, LossConfig(alpha=3.0))
    assert b - a == pytest.approx(2 * 1.0 / 2)
    with pytest.raises(ValueError):
        LossConfig(alpha=0)


def test_rbox_loss_examples():
    g = [RBoxCode(0.3, 0.4, 0.5)]
    assert rbox_loss(g, g) == 0.0
    assert rbox_loss([RBoxCode(0.5, 0.4, 0.5)], g) == pytest.approx(0.02, abs=1e-12)
    assert rbox_loss([RBoxCode(0.5, 0.4)], [RBoxCode(0.3, 0.4)]) == pytest.approx(0.02, abs=1e-12)
    with pytest.raises(ValueError):
        rbox_loss([RBoxCode(0.5, 0.4)], g)


def test_rbox_gradient_finite_difference():
    rng = np.random.default_rng(7)
    p, g = rng.uniform(0, 1, (2, 6, 3))
    fd = central_difference(lambda z: rbox_loss(z, g), p)
    assert grad_close(rbox_loss_grad(p, g), fd)


@given(st.lists(st.floats(-20, 20), min_size=1, max_size=12))
def test_losses_nonnegative(v):
    x = np.array(v)
    assert np.all(smooth_l1(x) >= 0) and np.all(smooth_ln(x) >= 0)
    assert mse(x, x * 0) >= 0
