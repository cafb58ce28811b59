"""Tracker hyperparameters and the ``key = value`` configuration format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict

from .features import FeatureSpec
from .monitor import MonitorState
from .proposals import ProposalConfig
from .redetection import RedetectionConfig
from .scale_adaptation import ScaleConfig


class ConfigError(ValueError):
    pass


def _f(default, lo=None, hi=None, lo_open=False, hi_open=False, key=None, choices=None, doc=""):
    return field(default=default, metadata=dict(lo=lo, hi=hi, lo_open=lo_open, hi_open=hi_open,
                                                key=key, choices=choices, doc=doc))


@dataclass(frozen=True)
class TrackerConfig:
    # correlation filter
    lam: float = _f(1e-4, 0, None, lo_open=True, key="lambda", doc="ridge regulariser")
    kernel_sigma: float = _f(0.5, 0, None, lo_open=True, doc="Gaussian kernel bandwidth")
    label_sigma_factor: float = _f(0.1, 0, None, lo_open=True,
                                   doc="label bandwidth as a fraction of sqrt(target cells)")
    eta: float = _f(0.02, 0, 1, doc="model learning rate")
    padding: float = _f(2.5, 1, None, lo_open=True, doc="search window / target size")
    template_size: int = _f(64, 8, None, doc="longer side of the resampled search window, px")
    feature: str = _f("gray", choices=("gray", "hog"), doc="feature kind")
    hog_bins: int = _f(9, 1, None, doc="HOG orientation bins")
    hog_cell: int = _f(4, 1, None, doc="HOG cell side, px")
    # monitor
    peak_ratio_threshold: float = _f(0.6, 0, 1, lo_open=True, doc="failure when peak < ratio * mean peak")
    apsr_ratio_threshold: float = _f(0.5, 0, 1, lo_open=True, doc="failure when APSR < ratio * mean APSR")
    warmup_frames: int = _f(5, 1, None, doc="confident frames before failure can be declared")
    # proposals
    scale_min: float = _f(0.5, 0, 1, lo_open=True, doc="smallest proposal size / reference")
    scale_max: float = _f(2.0, 1, None, doc="largest proposal size / reference")
    scale_step: float = _f(1.2, 1, None, lo_open=True, doc="multiplicative size step")
    nms_iou: float = _f(0.8, 0, 1, lo_open=True, doc="NMS IoU threshold")
    max_proposals: int = _f(300, 1, None, doc="proposals kept for re-detection")
    # instance classifier
    svm_learn_rate: float = _f(0.01, 0, None, lo_open=True, doc="SVM step size")
    svm_reg: float = _f(1e-4, 0, None, doc="SVM L2 regulariser")
    svm_gate_threshold: float = _f(0.0, doc="margin a candidate must exceed")
    svm_neg_iou: float = _f(0.3, 0, 1, doc="negatives have IoU below this")
    svm_max_negatives: int = _f(10, 0, None, doc="negatives per frame")
    # re-detection
    zeta: float = _f(1.0, 0, None, doc="motion prior weight")
    gamma1: float = _f(0.5, 0, 1, doc="position damping")
    region_scale: float = _f(4.0, 1, None, lo_open=True, doc="re-detection region / target size")
    full_frame_after: int = _f(5, 1, None, doc="consecutive failures before full-frame search")
    response_floor: float = _f(0.5, 0, None, doc="relocate only if response > floor * mean peak")
    # scale adaptation
    gamma2: float = _f(0.5, 0, 1, doc="size damping")
    keep_top: int = _f(200, 0, None, doc="scale proposals kept by objectness")
    band_lo: float = _f(0.6, 0, 1, doc="lowest IoU kept for scale proposals")
    band_hi: float = _f(0.9, 0, 1, doc="highest IoU kept for scale proposals")
    accept_ratio: float = _f(1.0, 0, None, lo_open=True, doc="candidate must beat ratio * current response")
    scale_region: float = _f(2.0, 1, None, doc="scale proposal region / target size")
    scale_stride: int = _f(1, 1, None, doc="run the scale stream every n confident frames")
    # tracker
    min_box_area: float = _f(4.0, 0, None, doc="revert to the previous box below this area, px^2")
    enable_redetect: bool = _f(True, doc="failure frames trigger re-detection")
    enable_scale: bool = _f(True, doc="confident frames run scale adaptation")
    enable_svm_gate: bool = _f(True, doc="train and apply the instance SVM")

    def __post_init__(self):
        for f in fields(self):
            _check(f, getattr(self, f.name))
        if self.band_lo >= self.band_hi:
            raise ConfigError("band_lo must be below band_hi")

    # sub-module views
    @property
    def feature_spec(self) -> FeatureSpec:
        return FeatureSpec(self.feature, self.hog_bins, self.hog_cell)

    @property
    def proposal_config(self) -> ProposalConfig:
        return ProposalConfig(scale_min=self.scale_min, scale_max=self.scale_max,
                              scale_step=self.scale_step, nms_iou=self.nms_iou,
                              max_proposals=self.max_proposals)

    @property
    def scale_config(self) -> ScaleConfig:
        return ScaleConfig(self.gamma2, self.keep_top, self.band_lo, self.band_hi,
                           self.accept_ratio, self.scale_region)

    @property
    def redetection_config(self) -> RedetectionConfig:
        return RedetectionConfig(self.zeta, self.gamma1, self.region_scale,
                                 self.full_frame_after, self.response_floor)

    def new_monitor(self) -> MonitorState:
        return MonitorState((), (), self.peak_ratio_threshold, self.apsr_ratio_threshold,
                            self.warmup_frames)

    def replace(self, **changes) -> "TrackerConfig":
        return dataclasses.replace(self, **changes)


def config_key(f: dataclasses.Field) -> str:
    return f.metadata.get("key") or f.name


def _check(f: dataclasses.Field, value: Any) -> None:
    m = f.metadata
    key = config_key(f)
    if m.get("choices") and value not in m["choices"]:
        raise ConfigError(f"{key}: {value!r} not in {m['choices']}")
    lo, hi = m.get("lo"), m.get("hi")
    if lo is not None and (value < lo or (m["lo_open"] and value == lo)):
        raise ConfigError(f"{key}: {value!r} below allowed range")
    if hi is not None and (value > hi or (m["hi_open"] and value == hi)):
        raise ConfigError(f"{key}: {value!r} above allowed range")


def _parse_value(f: dataclasses.Field, text: str):
    kind = f.type if isinstance(f.type, str) else f.type.__name__
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    return text


def parse_config(text: str, source: str = "<config>") -> TrackerConfig:
    by_key = {config_key(f): f for f in fields(TrackerConfig)}
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in by_key:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        f = by_key[key]
        try:
            parsed = _parse_value(f, value)
            _check(f, parsed)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        values[f.name] = parsed
    try:
        return TrackerConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> TrackerConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def dump_config(config: TrackerConfig = TrackerConfig()) -> str:
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{config_key(f)} = {value}  # {f.metadata['doc']}")
    return "\n".join(lines) + "\n"
