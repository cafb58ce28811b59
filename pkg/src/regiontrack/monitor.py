"""Tracking-confidence monitor built on the average peak-sidelobe ratio."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from .correlation_filter import ResponseMap

APSR_EPS = 1e-8
APSR_CAP = 1e6


class TrackingCondition(enum.Enum):
    CONFIDENT = "Confident"
    FAILURE = "Failure"

    def __str__(self):
        return self.value


def apsr(response) -> float:
    """Peak-minus-minimum over the mean of all non-peak values.

    The sidelobe mean is clamped below at 1e-8 and the result capped at 1e6.
    """
    f = response.values if isinstance(response, ResponseMap) else np.asarray(response, dtype=np.float64)
    if f.size < 2:
        raise ValueError("APSR needs at least two response values")
    if not np.all(np.isfinite(f)):
        raise ValueError("response contains non-finite values")
    fmax = float(f.max())
    sidelobe = (float(f.sum()) - fmax) / (f.size - 1)
    value = (fmax - float(f.min())) / max(APSR_EPS, sidelobe)
    return float(min(max(value, 0.0), APSR_CAP))


@dataclass(frozen=True)
class MonitorState:
    peak_history: Tuple[float, ...] = ()
    apsr_history: Tuple[float, ...] = ()
    peak_ratio_threshold: float = 0.6
    apsr_ratio_threshold: float = 0.5
    warmup_frames: int = 5

    def __post_init__(self):
        for name in ("peak_ratio_threshold", "apsr_ratio_threshold"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if self.warmup_frames < 1:
            raise ValueError("warmup_frames must be >= 1")

    @property
    def mean_peak(self) -> float:
        return float(np.mean(self.peak_history)) if self.peak_history else float("nan")

    @property
    def mean_apsr(self) -> float:
        return float(np.mean(self.apsr_history)) if self.apsr_history else float("nan")


def assess(state: MonitorState, peak: float, apsr_value: float) -> TrackingCondition:
    """Failure only when both the peak and the APSR drop below their scaled history means."""
    if len(state.peak_history) < state.warmup_frames:
        return TrackingCondition.CONFIDENT
    low_peak = peak < state.peak_ratio_threshold * state.mean_peak
    low_apsr = apsr_value < state.apsr_ratio_threshold * state.mean_apsr
    return TrackingCondition.FAILURE if (low_peak and low_apsr) else TrackingCondition.CONFIDENT


def record(state: MonitorState, peak: float, apsr_value: float,
           condition: TrackingCondition) -> MonitorState:
    if not (np.isfinite(peak) and np.isfinite(apsr_value)):
        raise ValueError("peak and APSR must be finite")
    if condition is not TrackingCondition.CONFIDENT:
        return state
    return replace(state,
                   peak_history=state.peak_history + (float(peak),),
                   apsr_history=state.apsr_history + (float(apsr_value),))
