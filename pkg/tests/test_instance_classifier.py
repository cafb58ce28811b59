import numpy as np
import pytest
from scipy import ndimage

from regiontrack.features import svm_feature_vector
from regiontrack.geometry import BoundingBox, Frame, iou
from regiontrack.instance_classifier import (SvmModel, gate, harvest_training_set, margin,
                                             update_one)
from regiontrack.proposals import Proposal


def unit(rng, n=1024):
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def test_margin_examples(rng):
    x = unit(rng)
    assert margin(SvmModel.zeros(), x) == 0.0
    assert margin(SvmModel(x.copy()), x) == pytest.approx(1.0)
    assert margin(SvmModel(np.array([1.0, -1.0]), 0.5), np.array([2.0, 1.0])) == 1.5


def test_margin_length_mismatch():
    with pytest.raises(ValueError):
        margin(SvmModel.zeros(4), np.zeros(5))


def test_margin_linear_part(rng):
    m = SvmModel(rng.standard_normal(16), 0.7)
    f1, f2 = rng.standard_normal(16), rng.standard_normal(16)
    a, b = 1.7, -0.4
    linear = lambda f: margin(m, f) - m.bias  # noqa: E731
    assert linear(a * f1 + b * f2) == pytest.approx(a * linear(f1) + b * linear(f2), abs=1e-12)


def test_single_positive_step(rng):
    x = unit(rng)
    m = update_one(SvmModel.zeros(learn_rate=1.0, reg=0.0), x, 1)
    assert margin(m, x) == pytest.approx(2.0)
    assert m.updates_seen == 1


def test_inactive_hinge_is_identity_without_reg(rng):
    x = unit(rng)
    m = SvmModel(2 * x, 0.0, reg=0.0)
    out = update_one(m, x, 1)
    assert np.array_equal(out.weights, m.weights) and out.bias == m.bias


def test_inactive_hinge_shrinks_with_reg(rng):
    x = unit(rng)
    m = SvmModel(3 * x, 0.0, learn_rate=0.1, reg=0.5)
    out = update_one(m, x, 1)
    assert np.linalg.norm(out.weights) < np.linalg.norm(m.weights)


def test_repeated_positive_margin_non_decreasing(rng):
    x = unit(rng)
    m = SvmModel.zeros(reg=0.0, learn_rate=0.05)
    last = margin(m, x)
    for _ in range(30):
        m = update_one(m, x, 1)
        now = margin(m, x)
        assert now >= last
        last = now
    assert last >= 1.0


def test_bad_label(rng):
    with pytest.raises(ValueError):
        update_one(SvmModel.zeros(), unit(rng), 0)


def candidates(rng, n):
    return [(Proposal(BoundingBox(i, 0, 2, 2), 1.0), unit(rng)) for i in range(n)]


def test_untrained_gate_passes_all(rng):
    c = candidates(rng, 5)
    assert gate(SvmModel.zeros(), c) == [p for p, _ in c]


def test_gate_fallback_keeps_best(rng):
    c = candidates(rng, 6)
    m = SvmModel(np.zeros(1024), -5.0, updates_seen=3)
    m = SvmModel(0.1 * c[4][1], -5.0, updates_seen=3)
    assert gate(m, c) == [c[4][0]]
    assert gate(m, []) == []


def texture(seed, size=96, sigma=1.5):
    noise = np.random.default_rng(seed).standard_normal((size, size))
    img = ndimage.gaussian_filter(noise, sigma)
    return (img - img.min()) / (img.max() - img.min())


def test_gate_separates_two_textures():
    a_img, b_img = texture(1, sigma=1.0), texture(2, sigma=4.0)
    box = BoundingBox(20, 20, 40, 40)
    m = SvmModel.zeros()
    rng = np.random.default_rng(5)
    for i in range(20):
        jitter = BoundingBox(20 + rng.uniform(-3, 3), 20 + rng.uniform(-3, 3), 40, 40)
        m = update_one(m, svm_feature_vector(Frame(a_img), jitter), 1)
        m = update_one(m, svm_feature_vector(Frame(b_img), jitter), -1)
    fresh = BoundingBox(22.5, 18.5, 40, 40)
    fa = svm_feature_vector(Frame(a_img), fresh)
    fb = svm_feature_vector(Frame(b_img), fresh)
    assert margin(m, fa) > 0 > margin(m, fb)
    pa, pb = Proposal(fresh, 1.0), Proposal(fresh.moved_to(50, 50), 1.0)
    assert gate(m, [(pa, fa), (pb, fb)]) == [pa]


def test_harvest_only_positive_when_no_negatives(rng):
    frame = Frame(rng.random((50, 50)))
    tracked = BoundingBox(10, 10, 20, 20)
    near = [Proposal(BoundingBox(11, 10, 20, 20), 1.0)]
    out = harvest_training_set(frame, tracked, near)
    assert len(out) == 1 and out[0][1] == 1


def test_harvest_caps_negatives(rng):
    frame = Frame(rng.random((200, 200)))
    tracked = BoundingBox(0, 0, 10, 10)
    far = [Proposal(BoundingBox(20 + 10 * i, 100, 10, 10), float(i)) for i in range(15)]
    out = harvest_training_set(frame, tracked, far)
    assert [lab for _, lab in out].count(-1) == 10
    # highest objectness first
    assert np.array_equal(out[1][0], svm_feature_vector(frame, far[14].box))


def test_harvest_iou_threshold(rng):
    frame = Frame(rng.random((40, 40)))
    tracked = BoundingBox(0, 0, 10, 10)
    # shifted copies: IoU = (10 - a) / (10 + a)
    below = BoundingBox(10 * (1 - 0.29) / 1.29 + 1e-6, 0, 10, 10)
    above = BoundingBox(10 * (1 - 0.31) / 1.31, 0, 10, 10)
    assert iou(below, tracked) < 0.3 < iou(above, tracked)
    out = harvest_training_set(frame, tracked, [Proposal(below, 1.0), Proposal(above, 2.0)])
    assert len(out) == 2
    assert np.array_equal(out[1][0], svm_feature_vector(frame, below))
