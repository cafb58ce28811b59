"""Search-window geometry shared by detection, re-detection and scale search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .features import FeatureMap, FeatureSpec, extract_features
from .geometry import BoundingBox, Frame, extract_patch


@dataclass(frozen=True)
class SearchWindow:
    """A padded window around the target, resampled to a fixed resolution.

    ``out_w`` x ``out_h`` is the window's pixel resolution after resampling;
    the feature map is that divided by the feature cell size.
    """

    padding: float
    out_w: int
    out_h: int
    features: FeatureSpec = FeatureSpec()

    @classmethod
    def for_target(cls, w: float, h: float, padding: float = 2.5, template_size: int = 64,
                   features: FeatureSpec = FeatureSpec()) -> "SearchWindow":
        """Fix the resolution so the window's longer side spans ``template_size`` pixels."""
        cell = features.cell_size
        ww, wh = w * padding, h * padding
        scale = template_size / max(ww, wh)
        out_w = max(cell * 2, int(round(ww * scale / cell)) * cell)
        out_h = max(cell * 2, int(round(wh * scale / cell)) * cell)
        return cls(padding, out_w, out_h, features)

    @property
    def feature_shape(self) -> Tuple[int, int]:
        cell = self.features.cell_size
        return (self.out_h // cell, self.out_w // cell)

    def box(self, center: Tuple[float, float], size: Tuple[float, float]) -> BoundingBox:
        return BoundingBox.from_center(center[0], center[1],
                                       size[0] * self.padding, size[1] * self.padding)

    def diagonal(self, size: Tuple[float, float]) -> float:
        return float(np.hypot(size[0] * self.padding, size[1] * self.padding))

    def features_at(self, frame: Frame, center: Tuple[float, float],
                    size: Tuple[float, float]) -> FeatureMap:
        patch = extract_patch(frame, self.box(center, size), self.out_w, self.out_h)
        return extract_features(patch, self.features)

    def to_pixels(self, displacement: Tuple[int, int], size: Tuple[float, float]) -> Tuple[float, float]:
        """Map a feature-cell displacement ``(dy, dx)`` to a frame-pixel shift ``(dx, dy)``."""
        rows, cols = self.feature_shape
        dy, dx = displacement
        return (dx * size[0] * self.padding / cols, dy * size[1] * self.padding / rows)
