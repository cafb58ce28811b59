"""Sequence ingestion, ground-truth parsing and results CSV I/O.

All boxes in files use the OTB convention (1-indexed pixel coordinates);
they are shifted to 0-indexed coordinates in memory.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, TextIO

import numpy as np
from PIL import Image

from .geometry import BoundingBox, Frame, to_grayscale

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".pgm"}
RESULT_FIELDS = ["frame_index", "x", "y", "w", "h", "peak", "apsr", "condition", "stream"]


class SequenceError(OSError):
    pass


class GroundTruthError(ValueError):
    pass


@dataclass(frozen=True)
class SequenceSpec:
    frames_dir: Path
    groundtruth_path: Optional[Path] = None
    name: str = ""


def _numeric_key(path: Path):
    digits = re.findall(r"\d+", path.stem)
    return (int(digits[-1]) if digits else float("inf"), path.name)


def list_images(frames_dir) -> List[Path]:
    """Image files of a sequence directory in numeric filename order.

    OTB layouts keep frames under ``img/``; that subdirectory is used when
    the directory itself holds no images.
    """
    d = Path(frames_dir)
    if not d.is_dir():
        raise SequenceError(f"sequence directory not found: {d}")
    files = [p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES]
    if not files and (d / "img").is_dir():
        files = [p for p in (d / "img").iterdir() if p.suffix.lower() in IMAGE_SUFFIXES]
    if not files:
        raise SequenceError(f"no images in {d}")
    return sorted(files, key=_numeric_key)


def read_frame(path: Path, index: int = 1) -> Frame:
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("RGB") if im.mode not in ("L", "RGB", "I;16") else im)
    except (OSError, ValueError) as exc:
        raise SequenceError(f"cannot read image {path}: {exc}") from None
    if arr.dtype == np.uint16:
        arr = arr.astype(np.float64) / 65535.0
    return Frame(to_grayscale(arr), index)


class FrameSequence:
    """Lazily decoded frames; indexing and iteration read images on demand."""

    def __init__(self, paths: Sequence[Path]):
        self.paths = list(paths)

    def __len__(self):
        return len(self.paths)

    def __getitem__(self, i: int) -> Frame:
        return read_frame(self.paths[i], i + 1)

    def __iter__(self) -> Iterator[Frame]:
        for i in range(len(self.paths)):
            yield self[i]


def parse_box(text: str, one_indexed: bool = True) -> Optional[BoundingBox]:
    """Parse ``x,y,w,h`` (comma and/or whitespace separated).

    Zero-area or NaN rows mark absent ground truth and return ``None``.
    """
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if len(parts) != 4:
        raise ValueError(f"expected 4 values, got {len(parts)}")
    x, y, w, h = (float(p) for p in parts)
    if not (w > 0 and h > 0):
        return None
    shift = 1.0 if one_indexed else 0.0
    return BoundingBox(x - shift, y - shift, w, h)


def load_groundtruth(path) -> List[Optional[BoundingBox]]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise SequenceError(f"cannot read ground truth {path}: {exc}") from None
    boxes = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            boxes.append(parse_box(line))
        except ValueError as exc:
            raise GroundTruthError(f"{path}:{lineno}: malformed ground-truth line {line!r}: {exc}") from None
    return boxes


def load_sequence(spec: SequenceSpec):
    frames = FrameSequence(list_images(spec.frames_dir))
    truth = load_groundtruth(spec.groundtruth_path) if spec.groundtruth_path else None
    return frames, truth


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def write_results(out: TextIO, results, truth: Optional[Sequence[Optional[BoundingBox]]] = None):
    from .geometry import iou

    writer = csv.writer(out, lineterminator="\n")
    header = RESULT_FIELDS + (["iou"] if truth is not None else [])
    writer.writerow(header)
    for i, r in enumerate(results):
        b = r.box
        row = [r.frame_index, _fmt(b.x + 1), _fmt(b.y + 1), _fmt(b.w), _fmt(b.h),
               _fmt(r.peak), _fmt(r.apsr), str(r.condition), str(r.stream)]
        if truth is not None:
            g = truth[i] if i < len(truth) else None
            row.append("" if g is None else _fmt(iou(b, g)))
        writer.writerow(row)


def read_result_boxes(path) -> List[BoundingBox]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"x", "y", "w", "h"} - set(reader.fieldnames or ())
        if missing:
            raise GroundTruthError(f"{path}: results CSV lacks columns {sorted(missing)}")
        boxes = []
        for lineno, row in enumerate(reader, start=2):
            try:
                boxes.append(BoundingBox(float(row["x"]) - 1, float(row["y"]) - 1,
                                         float(row["w"]), float(row["h"])))
            except (TypeError, ValueError) as exc:
                raise GroundTruthError(f"{path}:{lineno}: bad results row: {exc}") from None
    return boxes
