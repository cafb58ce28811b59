"""Command-line entry point: ``track``, ``eval`` and ``synth``.

Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import evaluation, synth, tracker
from .config import ConfigError, TrackerConfig, dump_config, load_config
from .geometry import BoundingBox
from .io import (GroundTruthError, SequenceError, SequenceSpec, load_groundtruth,
                 load_sequence, parse_box, read_result_boxes, write_results)

log = logging.getLogger("regiontrack")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
CURVE_POINTS = 101


class UsageError(Exception):
    pass


def _parse_init(text: str) -> BoundingBox:
    try:
        box = parse_box(text)
    except ValueError as exc:
        raise UsageError(f"--init: cannot parse {text!r}: {exc}") from None
    if box is None:
        raise UsageError(f"--init: box {text!r} has no area")
    return box


def cmd_track(args) -> int:
    if args.dump_config:
        sys.stdout.write(dump_config(TrackerConfig()))
        return EXIT_OK
    if not args.seq or not args.init:
        raise UsageError("track requires --seq and --init")
    init_box = _parse_init(args.init)
    config = load_config(args.config) if args.config else TrackerConfig()
    toggles = {}
    if args.no_redetect:
        toggles["enable_redetect"] = False
    if args.no_scale:
        toggles["enable_scale"] = False
    if args.no_svm:
        toggles["enable_svm_gate"] = False
    config = config.replace(**toggles)

    frames, truth = load_sequence(SequenceSpec(Path(args.seq), Path(args.gt) if args.gt else None))
    if truth is not None and len(truth) != len(frames):
        raise GroundTruthError(f"ground truth has {len(truth)} rows but the sequence has {len(frames)} frames")

    overlay_dir = Path(args.overlay) if args.overlay else None
    if overlay_dir:
        overlay_dir.mkdir(parents=True, exist_ok=True)
        from .report import write_overlay

    results = []
    state = None
    for frame in frames:
        if state is None:
            state = tracker.init(frame, init_box, config)
            result = tracker.initial_result(state, frame)
        else:
            state, result = tracker.step(state, frame, config)
        results.append(result)
        if overlay_dir:
            write_overlay(frame, result.box, overlay_dir / f"{frame.index:04d}.png",
                          truth[frame.index - 1] if truth else None)
        log.debug("frame %d %s %s peak=%.3f apsr=%.1f", frame.index, result.condition,
                  result.stream, result.peak, result.apsr)

    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_results(fh, results, truth)
    else:
        write_results(sys.stdout, results, truth)

    if args.plot:
        from .report import plot_confidence_trace
        overlaps = None
        if truth is not None:
            from .geometry import iou
            overlaps = [iou(r.box, g) if g is not None else float("nan") for r, g in zip(results, truth)]
        plot_confidence_trace(results, args.plot, overlaps)
    return EXIT_OK


def cmd_eval(args) -> int:
    tracked = read_result_boxes(args.results)
    truth = load_groundtruth(args.gt)
    if len(tracked) != len(truth):
        raise GroundTruthError(
            f"row-count mismatch: results have {len(tracked)} rows, ground truth has {len(truth)}")
    series = evaluation.overlap_series(tracked, truth, Path(args.results).stem)
    print(f"frames {len(series)}")
    print(f"average_overlap {evaluation.average_overlap(series):.4f}")
    print(f"success_rate@0.5 {evaluation.success_rate(series, 0.5):.4f}")
    print(f"success_auc {evaluation.success_auc(series, CURVE_POINTS):.4f}")
    curve = evaluation.success_curve(series, CURVE_POINTS)
    if args.curve:
        with open(args.curve, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["threshold", "success_rate"])
            for t, r in curve:
                w.writerow([f"{t:.2f}", f"{r:.6f}"])
    if args.plot:
        from .report import plot_success_curves
        plot_success_curves({series.sequence_name or "tracker": curve}, args.plot)
    return EXIT_OK


def cmd_synth(args) -> int:
    seq = synth.render(args.kind, args.frames, args.seed)
    gt = synth.write_sequence(seq, args.out)
    print(f"wrote {len(seq.frames)} frames to {Path(args.out) / 'img'} and ground truth to {gt}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regiontrack", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log per-frame diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("track", help="track a target through an image sequence")
    t.add_argument("--seq", help="directory of frames (or an OTB sequence with img/)")
    t.add_argument("--init", help="initial box 'x,y,w,h', 1-indexed as in OTB ground truth")
    t.add_argument("--gt", help="ground-truth file; adds a per-frame iou column")
    t.add_argument("--config", help="'key = value' configuration file")
    t.add_argument("--out", help="results CSV (default: stdout)")
    t.add_argument("--overlay", help="directory for frames with the tracked box drawn in")
    t.add_argument("--plot", help="PNG of the per-frame peak/APSR trace")
    t.add_argument("--no-redetect", action="store_true", help="disable failure re-detection")
    t.add_argument("--no-scale", action="store_true", help="disable scale adaptation")
    t.add_argument("--no-svm", action="store_true", help="disable the instance SVM gate")
    t.add_argument("--dump-config", action="store_true", help="print the default configuration")
    t.set_defaults(func=cmd_track)

    e = sub.add_parser("eval", help="overlap metrics of a results CSV against ground truth")
    e.add_argument("--results", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--curve", help="write the 101-point success curve CSV")
    e.add_argument("--plot", help="PNG of the success curve")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("synth", help="render a synthetic test sequence")
    s.add_argument("--kind", required=True, choices=synth.KINDS)
    s.add_argument("--frames", type=int, default=100)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"regiontrack {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SequenceError, GroundTruthError, OSError, ValueError) as exc:
        print(f"regiontrack {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
