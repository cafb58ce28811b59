"""Online linear SVM that gates generic proposals by target-instance appearance."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from .features import SVM_PATCH_SIDE, svm_feature_vector
from .geometry import BoundingBox, Frame, iou_many
from .proposals import Proposal, proposal_boxes

FEATURE_LENGTH = SVM_PATCH_SIDE * SVM_PATCH_SIDE


@dataclass(frozen=True, eq=False)
class SvmModel:
    weights: np.ndarray
    bias: float = 0.0
    learn_rate: float = 0.01
    reg: float = 1e-4
    updates_seen: int = 0

    def __post_init__(self):
        if not self.learn_rate > 0:
            raise ValueError("learn_rate must be positive")
        if self.reg < 0:
            raise ValueError("reg must be >= 0")

    @classmethod
    def zeros(cls, length: int = FEATURE_LENGTH, learn_rate: float = 0.01,
              reg: float = 1e-4) -> "SvmModel":
        return cls(np.zeros(length), 0.0, learn_rate, reg, 0)


def margin(model: SvmModel, feature: np.ndarray) -> float:
    feature = np.asarray(feature, dtype=np.float64)
    if feature.shape != model.weights.shape:
        raise ValueError(f"feature length {feature.shape} != weights {model.weights.shape}")
    return float(model.weights @ feature + model.bias)


def update_one(model: SvmModel, feature: np.ndarray, label: int) -> SvmModel:
    """One regularised hinge-loss subgradient step."""
    if label not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {label}")
    feature = np.asarray(feature, dtype=np.float64)
    m = margin(model, feature)
    shrink = 1.0 - model.learn_rate * model.reg
    if label * m < 1.0:
        weights = shrink * model.weights + model.learn_rate * label * feature
        bias = model.bias + model.learn_rate * label
    else:
        weights = model.weights if model.reg == 0 else shrink * model.weights
        bias = model.bias
    return replace(model, weights=weights, bias=bias, updates_seen=model.updates_seen + 1)


def update_many(model: SvmModel, samples: Sequence[Tuple[np.ndarray, int]]) -> SvmModel:
    for feature, label in samples:
        model = update_one(model, feature, label)
    return model


def gate(model: SvmModel, candidates: Sequence[Tuple[Proposal, np.ndarray]],
         threshold: float = 0.0) -> List[Proposal]:
    """Keep candidates with margin above ``threshold``.

    An untrained model passes everything through, and if nothing clears the
    threshold the single best-margin candidate is returned instead.
    """
    if not candidates:
        return []
    if model.updates_seen == 0:
        return [p for p, _ in candidates]
    margins = [margin(model, f) for _, f in candidates]
    kept = [p for (p, _), m in zip(candidates, margins) if m > threshold]
    if kept:
        return kept
    return [candidates[int(np.argmax(margins))][0]]


def harvest_training_set(frame: Frame, tracked: BoundingBox, proposals: Sequence[Proposal],
                         neg_iou: float = 0.3, max_negatives: int = 10
                         ) -> List[Tuple[np.ndarray, int]]:
    """One positive at the tracked box plus up to ``max_negatives`` low-overlap proposals."""
    samples = [(svm_feature_vector(frame, tracked), 1)]
    if not proposals:
        return samples
    overlaps = iou_many(tracked, proposal_boxes(proposals))
    negatives = [p for p, o in zip(proposals, overlaps) if o < neg_iou]
    negatives.sort(key=lambda p: -p.objectness)
    samples.extend((svm_feature_vector(frame, p.box), -1) for p in negatives[:max_negatives])
    return samples
