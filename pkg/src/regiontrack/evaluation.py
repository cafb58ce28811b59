"""Overlap-based tracking metrics: per-frame IoU, success rate and curve, average overlap."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import BoundingBox, iou


@dataclass(frozen=True, eq=False)
class OverlapSeries:
    values: np.ndarray
    sequence_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64).ravel())

    def __len__(self):
        return len(self.values)


def overlap_series(tracked: Sequence[BoundingBox], truth: Sequence[Optional[BoundingBox]],
                   sequence_name: str = "") -> OverlapSeries:
    """Per-frame IoU; frames whose ground truth is ``None`` are skipped."""
    if len(tracked) != len(truth):
        raise ValueError(f"length mismatch: {len(tracked)} tracked vs {len(truth)} ground-truth boxes")
    values = [iou(t, g) for t, g in zip(tracked, truth) if g is not None]
    return OverlapSeries(np.array(values), sequence_name)


def _values(series) -> np.ndarray:
    v = series.values if isinstance(series, OverlapSeries) else np.asarray(series, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty overlap series")
    return v


def success_rate(series, t: float) -> float:
    """Fraction of frames with overlap strictly above ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    v = _values(series)
    return float(np.count_nonzero(v > t)) / v.size


def average_overlap(series) -> float:
    return float(np.mean(_values(series)))


def success_curve(series, n_points: int = 101) -> List[Tuple[float, float]]:
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    v = _values(series)
    thresholds = np.linspace(0.0, 1.0, n_points)
    rates = (v[None, :] > thresholds[:, None]).sum(axis=1) / v.size
    return [(float(t), float(r)) for t, r in zip(thresholds, rates)]


def success_auc(series, n_points: int = 101) -> float:
    """Trapezoidal area under the success curve."""
    curve = np.array(success_curve(series, n_points))
    t, r = curve[:, 0], curve[:, 1]
    return float(np.sum((r[1:] + r[:-1]) * np.diff(t)) / 2.0)
