"""Two-stream tracker: correlation-filter localisation routed by a confidence
monitor into scale adaptation (confident frames) or proposal re-detection
(failure frames)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import correlation_filter as cf
from . import instance_classifier as svm
from .config import TrackerConfig
from .features import FeatureMap, svm_feature_vector
from .geometry import BoundingBox, Frame, clamp_to_frame, intersects
from .monitor import MonitorState, TrackingCondition, apsr, assess, record
from .proposals import Proposal, generate, edge_map
from .redetection import damped_position, search_region, select_candidate
from .scale_adaptation import best_scale, damped_size, recenter_candidates
from .window import SearchWindow


class Stream(enum.Enum):
    BASELINE = "Baseline"
    SCALE = "Scale"
    REDETECT = "Redetect"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class FrameResult:
    box: BoundingBox
    peak: float
    apsr: float
    condition: TrackingCondition
    stream: Stream
    frame_index: int = 1


@dataclass(frozen=True, eq=False)
class TrackerState:
    box: BoundingBox
    model: cf.FilterModel
    monitor: MonitorState
    svm: svm.SvmModel
    window: SearchWindow
    frame_shape: Tuple[int, int]
    consecutive_failures: int = 0
    frame_index: int = 1
    confident_frames: int = 0


def _label_sigma(window: SearchWindow, config: TrackerConfig) -> float:
    rows, cols = window.feature_shape
    target_cells = (cols / config.padding) * (rows / config.padding)
    return math.sqrt(target_cells) * config.label_sigma_factor


def _train_at(frame: Frame, box: BoundingBox, window: SearchWindow,
              labels: np.ndarray, config: TrackerConfig) -> Tuple[FeatureMap, np.ndarray]:
    x = window.features_at(frame, box.center(), (box.w, box.h))
    return x, cf.train(x, labels, config.lam, config.kernel_sigma)


def init(frame: Frame, box: BoundingBox, config: TrackerConfig = TrackerConfig()) -> TrackerState:
    """Train the filter on the first frame's padded target window."""
    if not intersects(box, frame.bounds):
        raise ValueError(f"initial box {box.as_tuple()} lies outside the frame")
    window = SearchWindow.for_target(box.w, box.h, config.padding, config.template_size,
                                     config.feature_spec)
    rows, cols = window.feature_shape
    label_sigma = _label_sigma(window, config)
    labels = cf.gaussian_labels(cols, rows, label_sigma)
    x, alpha_hat = _train_at(frame, box, window, labels, config)
    model = cf.FilterModel(alpha_hat, x, config.lam, config.kernel_sigma, label_sigma, config.eta)
    return TrackerState(box=box, model=model, monitor=config.new_monitor(),
                        svm=svm.SvmModel.zeros(learn_rate=config.svm_learn_rate, reg=config.svm_reg),
                        window=window, frame_shape=frame.intensity.shape,
                        consecutive_failures=0, frame_index=1)


def initial_result(state: TrackerState, frame: Frame) -> FrameResult:
    """Frame-1 record: the init box, Confident, with the filter's self-response statistics."""
    z = state.window.features_at(frame, state.box.center(), (state.box.w, state.box.h))
    resp = cf.detect(state.model, z)
    return FrameResult(state.box, float(resp.values.max()), apsr(resp),
                       TrackingCondition.CONFIDENT, Stream.BASELINE, state.frame_index)


def _labels(state: TrackerState) -> np.ndarray:
    rows, cols = state.window.feature_shape
    return cf.gaussian_labels(cols, rows, state.model.label_sigma)


def _finalise_box(box: BoundingBox, fallback: BoundingBox, frame: Frame,
                  config: TrackerConfig) -> BoundingBox:
    clamped = clamp_to_frame(box, frame.width, frame.height)
    if clamped.area < config.min_box_area:
        return clamp_to_frame(fallback, frame.width, frame.height)
    return clamped


def _update_model(state: TrackerState, frame: Frame, box: BoundingBox,
                  config: TrackerConfig) -> cf.FilterModel:
    x, alpha_hat = _train_at(frame, box, state.window, _labels(state), config)
    return cf.update(state.model, x, alpha_hat)


def _confident_step(state, frame, edges, box, peak, apsr_value, config):
    stream = Stream.BASELINE
    raw: Optional[List[Proposal]] = None
    if config.enable_scale or config.enable_svm_gate:
        region = box.scaled(config.scale_region)
        raw = generate(edges(), region, config.proposal_config, reference=(box.w, box.h))

    run_scale = config.enable_scale and state.confident_frames % config.scale_stride == 0
    if run_scale:
        stream = Stream.SCALE
        candidates = recenter_candidates(raw, box, config.scale_config)
        choice, _ = best_scale(state.model, frame, box, candidates, state.window,
                               config.accept_ratio)
        if choice is not None:
            w, h = damped_size(box.w, box.h, choice.w, choice.h, config.gamma2)
            cx, cy = box.center()
            box = BoundingBox.from_center(cx, cy, w, h)
    box = _finalise_box(box, state.box, frame, config)

    model = _update_model(state, frame, box, config)
    svm_model = state.svm
    if config.enable_svm_gate:
        samples = svm.harvest_training_set(frame, box, raw, config.svm_neg_iou,
                                           config.svm_max_negatives)
        svm_model = svm.update_many(svm_model, samples)
    monitor = record(state.monitor, peak, apsr_value, TrackingCondition.CONFIDENT)
    new_state = replace(state, box=box, model=model, monitor=monitor, svm=svm_model,
                        consecutive_failures=0, frame_index=frame.index,
                        confident_frames=state.confident_frames + 1)
    return new_state, stream


def _failure_step(state, frame, edges, config):
    box = state.box
    region = search_region(frame, box, state.consecutive_failures, config.redetection_config)
    proposals = generate(edges(), region, config.proposal_config, reference=(box.w, box.h))
    if proposals:
        if config.enable_svm_gate:
            pairs = [(p, svm_feature_vector(frame, p.box)) for p in proposals]
            proposals = svm.gate(state.svm, pairs, config.svm_gate_threshold)
        chosen, response = select_candidate(state.model, frame, proposals, box.center(),
                                            config.redetection_config, state.window,
                                            (box.w, box.h))
        mean_peak = state.monitor.mean_peak
        if math.isnan(mean_peak) or response > config.response_floor * mean_peak:
            cx, cy = damped_position(box.center(), chosen.box.center(), config.gamma1)
            box = _finalise_box(box.moved_to(cx, cy), state.box, frame, config)
    return replace(state, box=box, consecutive_failures=state.consecutive_failures + 1,
                   frame_index=frame.index)


def step(state: TrackerState, frame: Frame,
         config: TrackerConfig = TrackerConfig()) -> Tuple[TrackerState, FrameResult]:
    if frame.intensity.shape != state.frame_shape:
        raise ValueError(f"frame shape {frame.intensity.shape} != initial {state.frame_shape}")
    box = state.box
    size = (box.w, box.h)
    z = state.window.features_at(frame, box.center(), size)
    response = cf.detect(state.model, z)
    peak = float(response.values.max())
    apsr_value = apsr(response)
    dx, dy = state.window.to_pixels(response.peak_displacement(), size)
    cx, cy = box.center()
    located = box.moved_to(cx + dx, cy + dy)

    cache = {}

    def edges():
        if "e" not in cache:
            cache["e"] = edge_map(frame)
        return cache["e"]

    condition = assess(state.monitor, peak, apsr_value)
    if condition is TrackingCondition.CONFIDENT:
        new_state, stream = _confident_step(state, frame, edges, located, peak, apsr_value, config)
    elif config.enable_redetect:
        new_state = _failure_step(state, frame, edges, config)
        stream = Stream.REDETECT
    else:
        # Ablation: plain correlation-filter behaviour, the peak is trusted and the model updated.
        located = _finalise_box(located, state.box, frame, config)
        model = _update_model(state, frame, located, config)
        new_state = replace(state, box=located, model=model,
                            consecutive_failures=state.consecutive_failures + 1,
                            frame_index=frame.index)
        stream = Stream.BASELINE
    result = FrameResult(new_state.box, peak, apsr_value, condition, stream, frame.index)
    return new_state, result


def track_sequence(frames: Sequence[Frame], init_box: BoundingBox,
                   config: TrackerConfig = TrackerConfig()) -> List[FrameResult]:
    it = iter(frames)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("empty frame sequence") from None
    state = init(first, init_box, config)
    results = [initial_result(state, first)]
    for frame in it:
        state, result = step(state, frame, config)
        results.append(result)
    return results
