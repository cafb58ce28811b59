"""Correlation-filter visual tracking with objectness region proposals."""

from .config import TrackerConfig, load_config
from .geometry import BoundingBox, Frame, iou
from .tracker import FrameResult, Stream, init, step, track_sequence

__all__ = ["BoundingBox", "Frame", "FrameResult", "Stream", "TrackerConfig",
           "init", "iou", "load_config", "step", "track_sequence"]
__version__ = "0.1.0"
