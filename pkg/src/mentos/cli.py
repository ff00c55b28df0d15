"""Command line driver.

    mentos track --config PATH --frames DIR --dets FILE --out FILE
                 [--eval GT_FILE] [--report FILE] [--propagator geometric|external:DIR]
    mentos synth --spec FILE --out DIR
    mentos eval --gt FILE --pred FILE [--report FILE]
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import formats
from .config import ConfigError, PipelineConfig, load_config
from .formats import InputFormatError
from .glta import VideoMeta
from .mask import MaskError
from .metrics import evaluate
from .pipeline import make_propagator, run_pipeline
from .synth import SceneError, load_scene, render

log = logging.getLogger("mentos")


def _write_report(result, report_path):
    if report_path:
        Path(report_path).write_text(result.to_keyvalue(), encoding="utf-8")
    sys.stdout.write(result.to_text())


def cmd_track(args) -> int:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    if args.propagator:
        cfg = cfg.updated(propagator=args.propagator)
    frames_dir = Path(args.frames)
    meta_path = frames_dir / "meta.txt"
    if not meta_path.exists():
        log.error("%s: missing meta.txt", frames_dir)
        return 2
    meta = formats.read_meta(meta_path)
    frames = formats.read_frames(frames_dir)
    dets = formats.read_detections(args.dets)
    if not frames:
        log.error("%s: no frame images", frames_dir)
        return 2
    for f in frames:
        if f.shape != (meta.height, meta.width):
            log.error("frame size %s does not match meta.txt %dx%d", f.shape, meta.height, meta.width)
            return 2
    for t, ds in dets.items():
        if t >= len(frames):
            log.error("detections reference frame %d but only %d frames exist", t, len(frames))
            return 2
        if ds and ds[0].mask.shape != (meta.height, meta.width):
            log.error("detection canvas %s does not match meta.txt", ds[0].mask.shape)
            return 2

    propagator = make_propagator(cfg, frames, frames_dir.name, (meta.height, meta.width))
    result = run_pipeline(frames, dets, meta, cfg, propagator)
    if args.tracklets_out:
        formats.write_tracks(args.tracklets_out, formats.tracks_to_observations(result.tracklets))
    pred = formats.tracks_to_observations(result.tracks)
    formats.write_tracks(args.out, pred)
    if args.eval:
        gt = formats.read_tracks(args.eval)
        report = args.report or str(args.out) + ".eval"
        _write_report(evaluate(gt, pred), report)
    return 0


def cmd_synth(args) -> int:
    spec = load_scene(args.spec)
    video = render(spec)
    out = Path(args.out)
    formats.write_frames(out / "frames", video.frames)
    formats.write_meta(out / "frames" / "meta.txt", VideoMeta(spec.fps, spec.height, spec.width))
    formats.write_detections(out / "dets.txt", video.detections)
    formats.write_tracks(out / "gt.txt", video.gt)
    log.info("wrote %d frames to %s", len(video.frames), out)
    return 0


def cmd_eval(args) -> int:
    gt = formats.read_tracks(args.gt)
    pred = formats.read_tracks(args.pred)
    _write_report(evaluate(gt, pred), args.report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mentos", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("track", help="track one video")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--frames", required=True, help="directory of frames plus meta.txt")
    p.add_argument("--dets", required=True, help="detections file")
    p.add_argument("--out", required=True, help="output tracks file")
    p.add_argument("--eval", help="ground-truth tracks file to score against")
    p.add_argument("--report", help="key=value report path (default: OUT.eval)")
    p.add_argument("--propagator", help="geometric or external:DIR")
    p.add_argument("--tracklets-out", help="also write short-term tracklets here")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("synth", help="render a synthetic scene")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score predicted tracks")
    p.add_argument("--gt", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--report", help="key=value report path")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InputFormatError, ConfigError, SceneError, MaskError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
