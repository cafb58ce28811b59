import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regiontrack.geometry import (BoundingBox, Frame, Patch, clamp_to_frame, extract_patch,
                                  iou, resize, to_grayscale)


def raster_iou(a, b, size=100):
    """Pixel-counting oracle for integer-aligned boxes."""
    grid_a = np.zeros((size, size), bool)
    grid_b = np.zeros((size, size), bool)
    grid_a[int(a.y):int(a.y + a.h), int(a.x):int(a.x + a.w)] = True
    grid_b[int(b.y):int(b.y + b.h), int(b.x):int(b.x + b.w)] = True
    union = np.count_nonzero(grid_a | grid_b)
    return np.count_nonzero(grid_a & grid_b) / union


def test_box_rejects_degenerate():
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 0, 5)
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 5, -1)


def test_center_exact():
    assert BoundingBox(1.5, 2.0, 3.0, 7.0).center() == (3.0, 5.5)


def test_iou_identical_and_disjoint():
    a = BoundingBox(0, 0, 10, 10)
    assert iou(a, a) == 1.0
    assert iou(a, BoundingBox(20, 20, 5, 5)) == 0.0


def test_iou_half_overlap_matches_raster():
    a, b = BoundingBox(0, 0, 10, 10), BoundingBox(5, 0, 10, 10)
    assert iou(a, b) == pytest.approx(raster_iou(a, b, 32), abs=1e-9)
    assert iou(a, b) == pytest.approx(1 / 3, abs=1e-12)


def test_iou_random_pairs_against_pixel_counting(rng):
    for _ in range(1000):
        x1, y1, x2, y2 = rng.integers(0, 90, 4)
        w1, h1, w2, h2 = rng.integers(1, 10 + 1, 4)
        a, b = BoundingBox(x1, y1, w1, h1), BoundingBox(x2, y2, w2, h2)
        assert iou(a, b) == pytest.approx(raster_iou(a, b), abs=1e-9)


boxes = st.builds(BoundingBox, st.floats(-50, 50), st.floats(-50, 50),
                  st.floats(0.1, 40), st.floats(0.1, 40))


@given(boxes, boxes)
def test_iou_symmetric_and_bounded(a, b):
    assert iou(a, b) == iou(b, a)
    assert 0.0 <= iou(a, b) <= 1.0
    assert iou(a, a) == 1.0


def test_frame_validates_range():
    with pytest.raises(ValueError):
        Frame(np.full((4, 4), 1.5))
    f = Frame(np.zeros((3, 5)))
    assert (f.width, f.height) == (5, 3)


def test_grayscale_uses_rec601_weights():
    rgb = np.zeros((1, 3, 3), np.uint8)
    rgb[0, 0, 0] = rgb[0, 1, 1] = rgb[0, 2, 2] = 255
    assert np.allclose(to_grayscale(rgb)[0], [0.299, 0.587, 0.114])


def test_extract_constant_frame():
    frame = Frame(np.full((20, 30), 0.5))
    p = extract_patch(frame, BoundingBox(3.3, 4.1, 11.7, 6.2), 7, 9)
    assert p.intensity.shape == (9, 7)
    assert np.all(p.intensity == 0.5)


def test_extract_identity_crop_is_bitwise_copy(rng):
    img = rng.random((12, 17))
    frame = Frame(img)
    p = extract_patch(frame, frame.bounds, 17, 12)
    assert np.array_equal(p.intensity, img)


def test_extract_downsample_averages_blocks():
    img = np.array([[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]], float)
    p = extract_patch(Frame(img), BoundingBox(0, 0, 4, 4), 2, 2)
    assert np.allclose(p.intensity, 0.5, atol=1e-15)

    ramp = np.arange(16, dtype=float).reshape(4, 4) / 15
    out = extract_patch(Frame(ramp), BoundingBox(0, 0, 4, 4), 2, 2).intensity
    # sample points land at (0.5, 0.5) and (2.5, 2.5): equal bilinear weights on each 2x2 block
    blocks = ramp.reshape(2, 2, 2, 2).mean(axis=(1, 3))
    assert np.allclose(out, blocks, atol=1e-15)


def test_extract_out_of_frame_replicates_edges():
    img = np.tile(np.linspace(0.1, 0.9, 5), (5, 1))
    p = extract_patch(Frame(img), BoundingBox(-10, 0, 5, 5), 5, 5)
    assert np.allclose(p.intensity, 0.1)
    p = extract_patch(Frame(img), BoundingBox(-2, -3, 20, 20), 8, 8)
    assert p.intensity.shape == (8, 8)


def test_extract_is_translation_consistent(rng):
    big = rng.random((40, 40))
    box = BoundingBox(5, 6, 12, 9)
    for dx, dy in [(0, 0), (3, 1), (7, 9)]:
        shifted = np.zeros_like(big)
        shifted[dy:, dx:] = big[:40 - dy, :40 - dx]
        a = extract_patch(Frame(big), box, 10, 8).intensity
        b = extract_patch(Frame(shifted), BoundingBox(box.x + dx, box.y + dy, box.w, box.h), 10, 8).intensity
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_extract_rejects_bad_size():
    with pytest.raises(ValueError):
        extract_patch(Frame(np.zeros((4, 4))), BoundingBox(0, 0, 2, 2), 0, 3)


def test_resize_identity_and_constant(rng):
    img = rng.random((8, 8))
    assert np.array_equal(resize(Patch(img), 8, 8).intensity, img)
    const = resize(Patch(np.full((5, 7), 0.3)), 13, 4).intensity
    assert const.shape == (4, 13)
    assert np.allclose(const, 0.3, atol=1e-15)


def test_resize_halves_width_to_midpoint():
    out = resize(Patch(np.array([[0.0, 1.0], [0.0, 1.0]])), 1, 2).intensity
    assert out.shape == (2, 1)
    assert np.allclose(out, 0.5)


@settings(max_examples=50)
@given(boxes)
def test_clamp_keeps_box_inside(box):
    c = clamp_to_frame(box, 64, 48)
    assert c.x >= 0 and c.y >= 0 and c.x2 <= 64 + 1e-9 and c.y2 <= 48 + 1e-9
    if box.w <= 64 and box.h <= 48:
        assert (c.w, c.h) == (box.w, box.h)
