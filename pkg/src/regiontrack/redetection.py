"""Failure-stream re-detection: motion-weighted candidate selection and damped relocation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

from .correlation_filter import FilterModel, detect
from .geometry import BoundingBox, Frame
from .proposals import Proposal
from .window import SearchWindow

Point = Tuple[float, float]


@dataclass(frozen=True)
class RedetectionConfig:
    zeta: float = 1.0
    gamma1: float = 0.5
    region_scale: float = 4.0
    full_frame_after: int = 5
    response_floor: float = 0.5

    def __post_init__(self):
        if self.zeta < 0:
            raise ValueError("zeta must be >= 0")
        if not 0 <= self.gamma1 <= 1:
            raise ValueError("gamma1 must lie in [0, 1]")
        if not self.region_scale > 1:
            raise ValueError("region_scale must exceed 1")


def motion_weight(p_prev: Point, p_cand: Point, b: float) -> float:
    """Motion prior ``exp(-|p_cand - p_prev| / b) / (2b)``."""
    if not b > 0:
        raise ValueError("b must be positive")
    d = math.hypot(p_cand[0] - p_prev[0], p_cand[1] - p_prev[1])
    return math.exp(-d / b) / (2.0 * b)


def search_region(frame: Frame, current: BoundingBox, consecutive_failures: int,
                  config: RedetectionConfig) -> BoundingBox:
    """Region to draw re-detection proposals from.

    A ``region_scale`` multiple of the current box clipped to the frame, or
    the whole frame once failure has lasted ``full_frame_after`` frames.
    """
    if consecutive_failures >= config.full_frame_after:
        return frame.bounds
    r = current.scaled(config.region_scale)
    x0, y0 = max(r.x, 0.0), max(r.y, 0.0)
    x1, y1 = min(r.x2, float(frame.width)), min(r.y2, float(frame.height))
    if x1 <= x0 or y1 <= y0:
        return frame.bounds
    return BoundingBox(x0, y0, x1 - x0, y1 - y0)


def candidate_response(model: FilterModel, frame: Frame, proposal: Proposal,
                       window: SearchWindow, target_size: Tuple[float, float]) -> float:
    """Maximum filter response in a search window centred on the proposal."""
    z = window.features_at(frame, proposal.box.center(), target_size)
    return float(detect(model, z).values.max())


def select_candidate(model: FilterModel, frame: Frame, gated: Sequence[Proposal], p_prev: Point,
                     config: RedetectionConfig, window: SearchWindow,
                     target_size: Tuple[float, float]) -> Tuple[Proposal, float]:
    """Pick the proposal maximising response plus ``zeta`` times the motion prior.

    Ties go to the higher response, then the earlier candidate.
    """
    if not gated:
        raise ValueError("no candidates to select from")
    b = window.diagonal(target_size)
    best = None
    for i, p in enumerate(gated):
        f = candidate_response(model, frame, p, window, target_size)
        objective = f + config.zeta * motion_weight(p_prev, p.box.center(), b)
        key = (objective, f)
        if best is None or key > best[0]:
            best = (key, p, f)
    return best[1], best[2]


def damped_position(prev: Point, chosen: Point, gamma1: float) -> Point:
    if not 0 <= gamma1 <= 1:
        raise ValueError("gamma1 must lie in [0, 1]")
    return ((1 - gamma1) * prev[0] + gamma1 * chosen[0],
            (1 - gamma1) * prev[1] + gamma1 * chosen[1])
