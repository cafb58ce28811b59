"""Figures written next to the CSV outputs: success curves and confidence traces."""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from PIL import Image, ImageDraw  # noqa: E402

from .monitor import TrackingCondition  # noqa: E402


def plot_success_curves(curves: Dict[str, Sequence[Tuple[float, float]]], path,
                        title: str = "Success plot"):
    """One line per tracker/sequence; the legend carries the curve's AUC."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for name, curve in curves.items():
        c = np.asarray(curve)
        auc = float(np.sum((c[1:, 1] + c[:-1, 1]) * np.diff(c[:, 0])) / 2.0)
        ax.plot(c[:, 0], c[:, 1], label=f"{name} [{auc:.3f}]")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_xlabel("Overlap threshold")
    ax.set_ylabel("Success rate")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(loc="lower left")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_confidence_trace(results, path, overlaps=None):
    """Peak value and APSR per frame with failure frames shaded."""
    idx = np.array([r.frame_index for r in results])
    peak = np.array([r.peak for r in results])
    apsr = np.array([r.apsr for r in results])
    fail = np.array([r.condition is TrackingCondition.FAILURE for r in results])

    rows = 3 if overlaps is not None else 2
    fig, axes = plt.subplots(rows, 1, figsize=(8, 2.2 * rows), sharex=True)
    axes[0].plot(idx, peak, color="tab:blue")
    axes[0].set_ylabel("peak")
    axes[1].plot(idx, apsr, color="tab:orange")
    axes[1].set_ylabel("APSR")
    if overlaps is not None:
        axes[2].plot(idx, overlaps, color="tab:green")
        axes[2].set_ylabel("IoU")
        axes[2].set_ylim(0, 1.02)
    for ax in axes:
        for i in idx[fail]:
            ax.axvspan(i - 0.5, i + 0.5, color="tab:red", alpha=0.15, lw=0)
        ax.grid(alpha=0.3)
    axes[-1].set_xlabel("frame")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_overlay(frame, box, path, truth=None):
    """Save the frame as RGB with the tracked box drawn as a 2-px red rectangle."""
    gray = np.round(np.asarray(frame.intensity) * 255).astype(np.uint8)
    img = Image.fromarray(gray).convert("RGB")
    draw = ImageDraw.Draw(img)
    if truth is not None:
        draw.rectangle([truth.x, truth.y, truth.x2 - 1, truth.y2 - 1], outline=(0, 200, 0), width=1)
    draw.rectangle([box.x, box.y, box.x2 - 1, box.y2 - 1], outline=(255, 0, 0), width=2)
    img.save(Path(path))
