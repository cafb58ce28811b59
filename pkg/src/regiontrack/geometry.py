"""Boxes, frames, patch extraction and resampling.

Coordinates are real-valued with the origin at the top-left corner and y
growing downward. A box covers the continuous region [x, x + w) x [y, y + h);
pixel ``(r, c)`` covers [c, c + 1) x [r, r + 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"degenerate box: w={self.w}, h={self.h}")
        if not all(np.isfinite([self.x, self.y, self.w, self.h])):
            raise ValueError("box coordinates must be finite")

    @classmethod
    def from_center(cls, cx: float, cy: float, w: float, h: float) -> "BoundingBox":
        return cls(cx - w / 2.0, cy - h / 2.0, w, h)

    def center(self) -> Tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    def scaled(self, sx: float, sy: float | None = None) -> "BoundingBox":
        """Box with the same center and sides multiplied by ``(sx, sy)``."""
        sy = sx if sy is None else sy
        cx, cy = self.center()
        return BoundingBox.from_center(cx, cy, self.w * sx, self.h * sy)

    def moved_to(self, cx: float, cy: float) -> "BoundingBox":
        return BoundingBox.from_center(cx, cy, self.w, self.h)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True, eq=False)
class Frame:
    """Grayscale image with intensities in [0, 1]."""

    intensity: np.ndarray
    index: int = 1

    def __post_init__(self):
        img = np.asarray(self.intensity, dtype=np.float64)
        if img.ndim != 2 or img.size == 0:
            raise ValueError(f"frame intensity must be a non-empty 2-D array, got shape {img.shape}")
        if not np.all(np.isfinite(img)) or img.min() < 0.0 or img.max() > 1.0:
            raise ValueError("frame intensities must lie in [0, 1]")
        if self.index < 1:
            raise ValueError("frame index starts at 1")
        img.setflags(write=False)
        object.__setattr__(self, "intensity", img)

    @property
    def height(self) -> int:
        return self.intensity.shape[0]

    @property
    def width(self) -> int:
        return self.intensity.shape[1]

    @property
    def bounds(self) -> BoundingBox:
        return BoundingBox(0.0, 0.0, float(self.width), float(self.height))


@dataclass(frozen=True, eq=False)
class Patch:
    intensity: np.ndarray
    source_box: BoundingBox = field(default=None)

    @property
    def height(self) -> int:
        return self.intensity.shape[0]

    @property
    def width(self) -> int:
        return self.intensity.shape[1]


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Convert an 8-bit or float image (H, W[, C]) to float grayscale in [0, 1]."""
    img = np.asarray(image)
    scale = 255.0 if np.issubdtype(img.dtype, np.integer) else 1.0
    img = img.astype(np.float64) / scale
    if img.ndim == 3:
        if img.shape[2] == 1:
            img = img[:, :, 0]
        else:
            img = img[:, :, :3] @ np.asarray(LUMA_WEIGHTS)
    return np.clip(img, 0.0, 1.0)


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, 0 when disjoint."""
    if a == b:
        return 1.0
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return min(1.0, inter / (a.area + b.area - inter))


def iou_many(box: BoundingBox, boxes: np.ndarray) -> np.ndarray:
    """IoU of ``box`` against an (N, 4) array of ``x, y, w, h`` rows."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    iw = np.minimum(box.x2, boxes[:, 0] + boxes[:, 2]) - np.maximum(box.x, boxes[:, 0])
    ih = np.minimum(box.y2, boxes[:, 1] + boxes[:, 3]) - np.maximum(box.y, boxes[:, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    union = box.area + boxes[:, 2] * boxes[:, 3] - inter
    return np.minimum(inter / union, 1.0)


def intersects(a: BoundingBox, b: BoundingBox) -> bool:
    return intersection_area(a, b) > 0.0


def clamp_to_frame(box: BoundingBox, width: int, height: int) -> BoundingBox:
    """Slide ``box`` inside the frame, truncating only sides longer than the frame."""
    w = min(box.w, float(width))
    h = min(box.h, float(height))
    x = min(max(box.x, 0.0), width - w)
    y = min(max(box.y, 0.0), height - h)
    return BoundingBox(x, y, w, h)


def _sample_bilinear(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    # Coordinates outside the image clamp to the nearest edge pixel.
    h, w = img.shape
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (xs - x0)[None, :]
    fy = (ys - y0)[:, None]
    top = img[np.ix_(y0, x0)] * (1.0 - fx) + img[np.ix_(y0, x1)] * fx
    bottom = img[np.ix_(y1, x0)] * (1.0 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1.0 - fy) + bottom * fy


def _sample_grid(img: np.ndarray, x: float, y: float, w: float, h: float,
                 out_w: int, out_h: int) -> np.ndarray:
    # Center-aligned sampling: output pixel j maps to source x + (j + 0.5) * w / out_w - 0.5.
    xs = x + (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    ys = y + (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    return _sample_bilinear(img, ys, xs)


def extract_patch(frame: Frame, box: BoundingBox, out_w: int, out_h: int) -> Patch:
    """Crop ``box`` from ``frame`` and resample it to ``(out_w, out_h)``.

    Pixels outside the frame replicate the nearest edge pixel. The crop and
    the bilinear resize are performed in one sampling pass.
    """
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be positive, got {out_w}x{out_h}")
    if not (box.w > 0 and box.h > 0):
        raise ValueError("degenerate box")
    values = _sample_grid(frame.intensity, box.x, box.y, box.w, box.h, out_w, out_h)
    return Patch(values, box)


def resize(patch: Patch, out_w: int, out_h: int) -> Patch:
    """Bilinear resample of a patch; resizing to the same size is the identity."""
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be positive, got {out_w}x{out_h}")
    img = np.asarray(patch.intensity, dtype=np.float64)
    if img.shape == (out_h, out_w):
        return Patch(img.copy(), patch.source_box)
    values = _sample_grid(img, 0.0, 0.0, img.shape[1], img.shape[0], out_w, out_h)
    return Patch(values, patch.source_box)
