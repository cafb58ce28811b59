"""Edge-based objectness proposals: edge map, box scoring, sliding-window
enumeration, non-maximum suppression and IoU-band filtering.

The edge detector is a Sobel gradient-magnitude stand-in, and box scoring
uses an interior-minus-border edge mass normalised by perimeter**1.5. Both
are deliberate simplifications of structured-edge EdgeBoxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .geometry import BoundingBox, Frame, iou, iou_many

NOISE_FLOOR = 0.05


@dataclass(frozen=True)
class Proposal:
    box: BoundingBox
    objectness: float


@dataclass(frozen=True)
class ProposalConfig:
    scale_min: float = 0.5
    scale_max: float = 2.0
    scale_step: float = 1.2
    stride_frac: float = 0.05
    min_stride: float = 2.0
    nms_iou: float = 0.8
    max_proposals: int = 300
    shrink: float = 0.125
    kappa: float = 1.5

    def __post_init__(self):
        if not 0 < self.scale_min <= 1.0 <= self.scale_max:
            raise ValueError("scale range must bracket 1")
        if not self.scale_step > 1.0:
            raise ValueError("scale_step must exceed 1")
        if not 0 < self.nms_iou <= 1:
            raise ValueError("nms_iou must lie in (0, 1]")
        if self.max_proposals < 0:
            raise ValueError("max_proposals must be >= 0")
        if not 0 <= self.shrink < 1:
            raise ValueError("shrink must lie in [0, 1)")

    def scale_factors(self) -> np.ndarray:
        """Geometric factors ``step**k`` inside ``[scale_min, scale_max]``; 1 is always included."""
        step = math.log(self.scale_step)
        lo = math.ceil(math.log(self.scale_min) / step - 1e-9)
        hi = math.floor(math.log(self.scale_max) / step + 1e-9)
        return self.scale_step ** np.arange(lo, hi + 1, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class EdgeMap:
    magnitude: np.ndarray
    orientation: np.ndarray

    @property
    def shape(self):
        return self.magnitude.shape

    @cached_property
    def integral(self) -> np.ndarray:
        out = np.zeros((self.shape[0] + 1, self.shape[1] + 1))
        out[1:, 1:] = np.cumsum(np.cumsum(self.magnitude, axis=0), axis=1)
        return out


def edge_map(frame: Frame) -> EdgeMap:
    img = frame.intensity if isinstance(frame, Frame) else np.asarray(frame, dtype=np.float64)
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"edge map needs at least 3x3 pixels, got {img.shape}")
    gx = ndimage.sobel(img, axis=1, mode="nearest")
    gy = ndimage.sobel(img, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak > 0:
        mag[mag < NOISE_FLOOR * peak] = 0.0
    orientation = np.mod(np.arctan2(gy, gx), np.pi)
    # mod can round pi - tiny up to exactly pi
    orientation[orientation >= np.pi] = 0.0
    return EdgeMap(mag, orientation)


def _pixel_span(lo: np.ndarray, hi: np.ndarray, n: int):
    # Pixels whose centers fall in [lo, hi), clipped to [0, n].
    a = np.clip(np.ceil(lo - 0.5), 0, n).astype(np.intp)
    b = np.clip(np.ceil(hi - 0.5), 0, n).astype(np.intp)
    return a, np.maximum(a, b)


def _box_sums(integral: np.ndarray, x, y, w, h) -> np.ndarray:
    rows, cols = integral.shape[0] - 1, integral.shape[1] - 1
    c0, c1 = _pixel_span(x, x + w, cols)
    r0, r1 = _pixel_span(y, y + h, rows)
    return integral[r1, c1] - integral[r0, c1] - integral[r1, c0] + integral[r0, c0]


def score_boxes(edges: EdgeMap, boxes: np.ndarray, shrink: float = 0.125,
                kappa: float = 1.5) -> np.ndarray:
    """Vectorised objectness for an (N, 4) array of ``x, y, w, h`` rows.

    The interior is the concentric box whose width and height are each
    ``1 - shrink`` times the original; the rest of the box is the border band.
    """
    b = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    x, y, w, h = b.T
    total = _box_sums(edges.integral, x, y, w, h)
    m = shrink / 2.0
    inner = _box_sums(edges.integral, x + m * w, y + m * h, (1 - shrink) * w, (1 - shrink) * h)
    band = total - inner
    score = (inner - band) / (2.0 * (w + h)) ** kappa
    return np.maximum(score, 0.0)


def score_box(edges: EdgeMap, box: BoundingBox, shrink: float = 0.125,
              kappa: float = 1.5) -> float:
    """Edge mass inside the box core minus that on its border band, perimeter-normalised."""
    return float(score_boxes(edges, np.array([box.as_tuple()]), shrink, kappa)[0])


def _axis_offsets(extent: float, stride: float) -> np.ndarray:
    k = int(math.floor(extent / 2.0 / stride + 1e-9))
    return np.arange(-k, k + 1) * stride


def enumerate_boxes(region: BoundingBox, reference: Tuple[float, float],
                    config: ProposalConfig, frame_shape: Tuple[int, int]) -> np.ndarray:
    """Grid of candidate boxes in grid order: row, column, width, height.

    Box centers sit on a stride lattice around the region center and stay
    inside the region; boxes that miss the frame entirely are dropped. Grid
    order breaks score ties, and keeping it position-major means tied boxes
    at one location still span several sizes after suppression.
    """
    rw, rh = reference
    factors = config.scale_factors()
    cx0, cy0 = region.center()
    chunks = []
    for fw in factors:
        w = rw * fw
        xs = cx0 + _axis_offsets(region.w, max(config.min_stride, config.stride_frac * w))
        for fh in factors:
            h = rh * fh
            ys = cy0 + _axis_offsets(region.h, max(config.min_stride, config.stride_frac * h))
            cy, cx = np.meshgrid(ys, xs, indexing="ij")
            n = cx.size
            chunks.append(np.column_stack([cx.ravel() - w / 2, cy.ravel() - h / 2,
                                           np.full(n, w), np.full(n, h)]))
    boxes = np.concatenate(chunks) if chunks else np.zeros((0, 4))
    cy = boxes[:, 1] + boxes[:, 3] / 2
    cx = boxes[:, 0] + boxes[:, 2] / 2
    boxes = boxes[np.lexsort((boxes[:, 3], boxes[:, 2], cx, cy))]
    fh_, fw_ = frame_shape
    inside = ((boxes[:, 0] < fw_) & (boxes[:, 0] + boxes[:, 2] > 0)
              & (boxes[:, 1] < fh_) & (boxes[:, 1] + boxes[:, 3] > 0))
    return boxes[inside]


def _iou_rows(box: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    iw = np.minimum(box[0] + box[2], boxes[:, 0] + boxes[:, 2]) - np.maximum(box[0], boxes[:, 0])
    ih = np.minimum(box[1] + box[3], boxes[:, 1] + boxes[:, 3]) - np.maximum(box[1], boxes[:, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    return inter / (box[2] * box[3] + boxes[:, 2] * boxes[:, 3] - inter)


def _descending_segments(scores: np.ndarray, first: int):
    # Indices by (score desc, index asc). The leading segment is cut with a
    # partial sort, so a full sort only happens if a caller reads past it.
    n = len(scores)
    if n <= first:
        yield np.lexsort((np.arange(n), -scores))
        return
    kth = np.partition(scores, n - first)[n - first]
    head = np.flatnonzero(scores >= kth)
    yield head[np.lexsort((head, -scores[head]))]
    tail = np.flatnonzero(scores < kth)
    yield tail[np.lexsort((tail, -scores[tail]))]


def nms_indices(boxes: np.ndarray, scores: np.ndarray, iou_threshold: float,
                limit: Optional[int] = None, chunk: int = 4096) -> List[int]:
    """Greedy NMS returning kept indices in descending score order.

    Ties in score keep the earlier index first. Stopping at ``limit`` kept
    boxes is exact because later boxes never affect earlier decisions; the
    sorted list is processed in chunks so huge grids stay cheap.
    """
    if not 0 < iou_threshold <= 1:
        raise ValueError("iou_threshold must lie in (0, 1]")
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    scores = np.asarray(scores, dtype=np.float64).ravel()
    limit = len(scores) if limit is None else limit
    kept: List[int] = []
    for order in _descending_segments(scores, 4 * chunk):
        for start in range(0, len(order), chunk):
            if len(kept) >= limit:
                return kept
            remaining = order[start:start + chunk]
            if kept:
                alive = np.ones(len(remaining), dtype=bool)
                for row in boxes[kept]:
                    alive &= _iou_rows(row, boxes[remaining]) <= iou_threshold
                remaining = remaining[alive]
            while len(remaining) and len(kept) < limit:
                i = remaining[0]
                kept.append(int(i))
                rest = remaining[1:]
                remaining = rest[_iou_rows(boxes[i], boxes[rest]) <= iou_threshold]
    return kept


def nms(proposals: Sequence[Proposal], iou_threshold: float) -> List[Proposal]:
    if not proposals:
        return []
    boxes = np.array([p.box.as_tuple() for p in proposals])
    scores = np.array([p.objectness for p in proposals])
    return [proposals[i] for i in nms_indices(boxes, scores, iou_threshold)]


def generate(edges: EdgeMap, region: BoundingBox, config: ProposalConfig = ProposalConfig(),
             reference: Optional[Tuple[float, float]] = None) -> List[Proposal]:
    """Score every grid box around ``region`` and return the NMS survivors, best first.

    ``reference`` is the (w, h) the scale grid is relative to; it defaults to
    the region's own size.
    """
    reference = (region.w, region.h) if reference is None else reference
    boxes = enumerate_boxes(region, reference, config, edges.shape)
    if len(boxes) == 0:
        return []
    scores = score_boxes(edges, boxes, config.shrink, config.kappa)
    keep = nms_indices(boxes, scores, config.nms_iou, limit=config.max_proposals)
    return [Proposal(BoundingBox(*boxes[i]), float(scores[i])) for i in keep]


def reject_band(proposals: Sequence[Proposal], current: BoundingBox,
                lo: float = 0.6, hi: float = 0.9) -> List[Proposal]:
    """Keep proposals whose IoU with ``current`` lies in ``[lo, hi]``."""
    if not 0 <= lo < hi <= 1:
        raise ValueError("band must satisfy 0 <= lo < hi <= 1")
    return [p for p in proposals if lo <= iou(p.box, current) <= hi]


def top_k(proposals: Sequence[Proposal], k: int) -> List[Proposal]:
    """The ``k`` highest-objectness proposals; ties keep input order."""
    if k < 0:
        raise ValueError("k must be >= 0")
    order = sorted(range(len(proposals)), key=lambda i: -proposals[i].objectness)
    return [proposals[i] for i in order[:k]]


def proposal_boxes(proposals: Sequence[Proposal]) -> np.ndarray:
    return np.array([p.box.as_tuple() for p in proposals]).reshape(-1, 4)


def ious_to(box: BoundingBox, proposals: Sequence[Proposal]) -> np.ndarray:
    return iou_many(box, proposal_boxes(proposals))
