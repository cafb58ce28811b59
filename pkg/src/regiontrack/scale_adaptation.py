"""Confident-stream size estimation from concentric scale proposals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .correlation_filter import FilterModel, response_at_zero
from .geometry import BoundingBox, Frame
from .proposals import EdgeMap, Proposal, ProposalConfig, generate, reject_band, top_k
from .window import SearchWindow


@dataclass(frozen=True)
class ScaleConfig:
    gamma2: float = 0.5
    keep_top: int = 200
    band_lo: float = 0.6
    band_hi: float = 0.9
    accept_ratio: float = 1.0
    region_scale: float = 2.0

    def __post_init__(self):
        if not 0 <= self.gamma2 <= 1:
            raise ValueError("gamma2 must lie in [0, 1]")
        if not 0 <= self.band_lo < self.band_hi <= 1:
            raise ValueError("band must satisfy 0 <= lo < hi <= 1")
        if self.keep_top < 0:
            raise ValueError("keep_top must be >= 0")
        if not self.accept_ratio > 0:
            raise ValueError("accept_ratio must be positive")


def recenter_candidates(proposals: Sequence[Proposal], current: BoundingBox,
                        config: ScaleConfig) -> List[Proposal]:
    """Move proposals onto the current center, keep the best per size, then top-K and band-filter."""
    cx, cy = current.center()
    seen = set()
    centred = []
    for p in proposals:
        key = (p.box.w, p.box.h)
        if key in seen:
            continue
        seen.add(key)
        centred.append(Proposal(BoundingBox.from_center(cx, cy, p.box.w, p.box.h), p.objectness))
    return reject_band(top_k(centred, config.keep_top), current, config.band_lo, config.band_hi)


def scale_candidates(edges: EdgeMap, current: BoundingBox, config: ScaleConfig = ScaleConfig(),
                     proposal_config: ProposalConfig = ProposalConfig()) -> List[Proposal]:
    region = current.scaled(config.region_scale)
    raw = generate(edges, region, proposal_config, reference=(current.w, current.h))
    return recenter_candidates(raw, current, config)


def best_scale(model: FilterModel, frame: Frame, current: BoundingBox,
               candidates: Sequence[Proposal], window: SearchWindow,
               accept_ratio: float = 1.0) -> Tuple[Optional[BoundingBox], float]:
    """Best candidate size by aligned response, or ``None`` if none beats the current size."""
    if not candidates:
        return None, float("nan")
    center = current.center()
    r0 = response_at_zero(model, window.features_at(frame, center, (current.w, current.h)))
    best_box, best_r = None, -float("inf")
    for p in candidates:
        r = response_at_zero(model, window.features_at(frame, center, (p.box.w, p.box.h)))
        if r > best_r:
            best_box, best_r = p.box, r
    if best_r > accept_ratio * r0:
        return best_box, best_r
    return None, best_r


def damped_size(prev_w: float, prev_h: float, chosen_w: float, chosen_h: float,
                gamma2: float) -> Tuple[float, float]:
    if not 0 <= gamma2 <= 1:
        raise ValueError("gamma2 must lie in [0, 1]")
    if min(prev_w, prev_h, chosen_w, chosen_h) <= 0:
        raise ValueError("sizes must be positive")
    return ((1 - gamma2) * prev_w + gamma2 * chosen_w,
            (1 - gamma2) * prev_h + gamma2 * chosen_h)
