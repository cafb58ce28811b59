"""Feature maps for the correlation filter and the instance classifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BoundingBox, Frame, Patch, extract_patch

SVM_PATCH_SIDE = 32


@dataclass(frozen=True)
class FeatureSpec:
    """Feature configuration.

    ``kind`` is ``"gray"`` (one mean-removed intensity channel at pixel
    resolution) or ``"hog"`` (``hog_bins`` unsigned orientation channels over
    ``hog_cell`` x ``hog_cell`` pixel cells).
    """

    kind: str = "gray"
    hog_bins: int = 9
    hog_cell: int = 4
    hog_clip: float = 0.2

    def __post_init__(self):
        if self.kind not in ("gray", "hog"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.hog_bins < 1 or self.hog_cell < 1:
            raise ValueError("hog_bins and hog_cell must be positive")

    @property
    def cell_size(self) -> int:
        return 1 if self.kind == "gray" else self.hog_cell

    @property
    def channels(self) -> int:
        return 1 if self.kind == "gray" else self.hog_bins


@dataclass(frozen=True, eq=False)
class FeatureMap:
    values: np.ndarray  # (channels, rows, cols)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim == 2:
            v = v[None]
        if v.ndim != 3:
            raise ValueError(f"feature values must be 3-D, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self):
        return self.values.shape


def cosine_window(w: int, h: int) -> np.ndarray:
    """Outer product of Hann windows, shape ``(h, w)``; a length-1 window is 1."""
    if w < 1 or h < 1:
        raise ValueError("window size must be positive")
    return np.outer(np.hanning(h), np.hanning(w))


def hog_histograms(intensity: np.ndarray, bins: int = 9, cell: int = 4,
                   clip: float = 0.2) -> np.ndarray:
    """Per-cell unsigned gradient-orientation histograms, shape ``(bins, rows, cols)``.

    Gradients are central differences with replicated borders. Each pixel
    votes its gradient magnitude into one orientation bin over [0, pi). Each
    cell histogram is L2-normalised and clipped at ``clip``; cells do not
    overlap and trailing pixels that do not fill a cell are dropped.
    """
    img = np.asarray(intensity, dtype=np.float64)
    padded = np.pad(img, 1, mode="edge")
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    mag = np.hypot(gx, gy)
    theta = np.mod(np.arctan2(gy, gx), np.pi)
    bin_idx = np.minimum((theta / (np.pi / bins)).astype(np.intp), bins - 1)

    rows, cols = img.shape[0] // cell, img.shape[1] // cell
    if rows == 0 or cols == 0:
        raise ValueError(f"patch {img.shape} smaller than one {cell}x{cell} cell")
    mag = mag[: rows * cell, : cols * cell]
    bin_idx = bin_idx[: rows * cell, : cols * cell]

    hist = np.zeros((bins, rows, cols))
    cell_r = np.arange(rows * cell) // cell
    cell_c = np.arange(cols * cell) // cell
    rr, cc = np.meshgrid(cell_r, cell_c, indexing="ij")
    np.add.at(hist, (bin_idx, rr, cc), mag)

    norms = np.sqrt(np.sum(hist ** 2, axis=0, keepdims=True))
    hist = np.where(norms > 1e-12, hist / np.maximum(norms, 1e-12), 0.0)
    return np.minimum(hist, clip)


def extract_features(patch: Patch, spec: FeatureSpec = FeatureSpec()) -> FeatureMap:
    img = np.asarray(patch.intensity, dtype=np.float64)
    if img.size == 0:
        raise ValueError("empty patch")
    if spec.kind == "gray":
        values = (img - img.mean()) * cosine_window(img.shape[1], img.shape[0])
        return FeatureMap(values[None])
    hist = hog_histograms(img, spec.hog_bins, spec.hog_cell, spec.hog_clip)
    return FeatureMap(hist * cosine_window(hist.shape[2], hist.shape[1])[None])


def svm_feature_vector(frame: Frame, box: BoundingBox) -> np.ndarray:
    """Mean-removed, unit-norm 32x32 appearance vector of ``box`` (length 1024)."""
    patch = extract_patch(frame, box, SVM_PATCH_SIDE, SVM_PATCH_SIDE).intensity
    v = (patch - patch.mean()).ravel()
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        return np.zeros_like(v)
    return v / norm
