"""Deterministic synthetic sequences for exercising the tracker.

Each sequence shows a textured elliptical target over a low-contrast static
background. The texture is defined in target-normalised coordinates, so it
scales with the target.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
from PIL import Image
from scipy import ndimage

from .geometry import BoundingBox

KINDS = ("translate", "occlude", "grow", "aspect")
FRAME_W, FRAME_H = 320, 240
GROUNDTRUTH_NAME = "groundtruth_rect.txt"


@dataclass(frozen=True)
class SynthSequence:
    kind: str
    frames: List[np.ndarray]  # float images in [0, 1]
    boxes: List[BoundingBox]  # 0-indexed truth, one per frame
    occluded: Tuple[int, int] = (0, -1)  # 1-based inclusive frame range


def occlusion_range(n_frames: int) -> Tuple[int, int]:
    return n_frames // 3, (2 * n_frames) // 3


def _background(rng: np.random.Generator) -> np.ndarray:
    noise = rng.standard_normal((FRAME_H, FRAME_W))
    smooth = ndimage.gaussian_filter(noise, 3.0, mode="wrap")
    smooth /= smooth.std()
    return 0.3 + 0.04 * smooth


def _texture_params(rng: np.random.Generator, n: int = 5):
    freq = rng.uniform(1.0, 2.5, n)
    angle = rng.uniform(0, np.pi, n)
    phase = rng.uniform(0, 2 * np.pi, n)
    return freq, angle, phase


def _render_target(img, cx, cy, rx, ry, params):
    freq, angle, phase = params
    x0, x1 = int(max(0, np.floor(cx - rx - 2))), int(min(FRAME_W, np.ceil(cx + rx + 2)))
    y0, y1 = int(max(0, np.floor(cy - ry - 2))), int(min(FRAME_H, np.ceil(cy + ry + 2)))
    if x1 <= x0 or y1 <= y0:
        return
    xs = np.arange(x0, x1) + 0.5
    ys = np.arange(y0, y1) + 0.5
    u = (xs[None, :] - cx) / rx
    v = (ys[:, None] - cy) / ry
    rho = np.sqrt(u ** 2 + v ** 2)
    alpha = np.clip((1.0 - rho) * min(rx, ry) + 0.5, 0.0, 1.0)
    tex = np.zeros_like(rho)
    for f, a, p in zip(freq, angle, phase):
        tex += np.cos(np.pi * f * (u * np.cos(a) + v * np.sin(a)) + p)
    value = 0.62 + 0.25 * tex / len(freq) * 2.0 - 0.12 * rho ** 2
    value = np.clip(value, 0.05, 0.95)
    patch = img[y0:y1, x0:x1]
    img[y0:y1, x0:x1] = (1 - alpha) * patch + alpha * value


def render(kind: str, n_frames: int = 100, seed: int = 0) -> SynthSequence:
    """Render ``n_frames`` frames of the requested kind.

    translate: radius-16 disk moving 2 px/frame to the right.
    occlude:   as translate, hidden by a vertical bar over frames N//3 .. 2N//3.
    grow:      static disk whose radius grows 1 % per frame.
    aspect:    static ellipse whose width grows 1 % per frame.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    rng = np.random.default_rng(seed)
    background = _background(rng)
    params = _texture_params(rng)
    occ = occlusion_range(n_frames) if kind == "occlude" else (0, -1)

    frames, boxes = [], []
    for i in range(n_frames):
        if kind in ("translate", "occlude"):
            cx, cy, rx, ry = 60.0 + 2.0 * i, 120.0, 16.0, 16.0
        elif kind == "grow":
            r = 14.0 * 1.01 ** i
            cx, cy, rx, ry = 160.0, 120.0, r, r
        else:
            cx, cy, rx, ry = 160.0, 120.0, 14.0 * 1.01 ** i, 14.0
        img = background.copy()
        _render_target(img, cx, cy, rx, ry, params)
        if occ[0] <= i + 1 <= occ[1]:
            half = rx + 10.0
            x0, x1 = int(np.floor(cx - half)), int(np.ceil(cx + half))
            img[:, max(0, x0):min(FRAME_W, x1)] = 0.5
        frame_rng = np.random.default_rng([seed, i + 1])
        img = np.clip(img + 0.01 * frame_rng.standard_normal(img.shape), 0.0, 1.0)
        frames.append(img)
        boxes.append(BoundingBox(cx - rx, cy - ry, 2 * rx, 2 * ry))
    return SynthSequence(kind, frames, boxes, occ)


def format_box_line(box: BoundingBox) -> str:
    """Ground-truth line in 1-indexed ``x,y,w,h`` form."""
    vals = (box.x + 1, box.y + 1, box.w, box.h)
    return ",".join(f"{v:.4f}".rstrip("0").rstrip(".") for v in vals)


def write_sequence(seq: SynthSequence, out_dir) -> Path:
    out = Path(out_dir)
    (out / "img").mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(seq.frames, start=1):
        Image.fromarray(np.round(img * 255).astype(np.uint8)).save(
            out / "img" / f"{i:04d}.png")
    gt = out / GROUNDTRUTH_NAME
    gt.write_text("".join(format_box_line(b) + "\n" for b in seq.boxes))
    return gt
