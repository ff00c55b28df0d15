"""Text formats for detections, tracks, video metadata, and frame images.

Detections, one per line::

    frame_index class_id score img_h img_w compressed_rle

Tracks add the track id after the frame index::

    frame_index track_id class_id score img_h img_w compressed_rle
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image

from .glta import VideoMeta
from .mask import MaskError, compressed_rle_decode, compressed_rle_encode
from .metrics import TrackObservation
from .sta import Detection, Tracklet

FRAME_SUFFIXES = {".png", ".ppm", ".pgm", ".pnm"}


class InputFormatError(ValueError):
    def __init__(self, path, problems: list[tuple[int, str]]):
        self.path = str(path)
        self.problems = problems
        lines = [f"{self.path}:{n}: {msg}" for n, msg in problems]
        super().__init__("\n".join(lines))


@dataclass(frozen=True)
class _Row:
    frame: int
    track_id: int | None
    class_id: int
    score: float
    mask: object


def _parse_rows(path, with_track: bool) -> list[_Row]:
    expected = 7 if with_track else 6
    rows, problems = [], []
    canvas = None
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != expected:
            problems.append((lineno, f"expected {expected} fields, found {len(parts)}"))
            continue
        try:
            frame = int(parts[0])
            rest = parts[1:]
            track_id = None
            if with_track:
                track_id = int(rest[0])
                rest = rest[1:]
            class_id = int(rest[0])
            score = float(rest[1])
            h, w = int(rest[2]), int(rest[3])
            mask = compressed_rle_decode(rest[4], h, w)
        except (ValueError, MaskError) as exc:
            problems.append((lineno, str(exc)))
            continue
        if frame < 0:
            problems.append((lineno, "negative frame index"))
            continue
        if not 0.0 <= score <= 1.0:
            problems.append((lineno, f"score {score} outside [0, 1]"))
            continue
        if canvas is None:
            canvas = (h, w)
        elif canvas != (h, w):
            problems.append((lineno, f"canvas {h}x{w} differs from {canvas[0]}x{canvas[1]}"))
            continue
        rows.append(_Row(frame, track_id, class_id, score, mask))
    if problems:
        raise InputFormatError(path, problems)
    return rows


def read_detections(path) -> dict[int, list[Detection]]:
    out: dict[int, list[Detection]] = {}
    for r in _parse_rows(path, with_track=False):
        out.setdefault(r.frame, []).append(Detection(r.frame, r.mask, {r.class_id: r.score}))
    return out


def read_tracks(path) -> list[TrackObservation]:
    return [
        TrackObservation(r.frame, r.track_id, r.class_id, r.mask, r.score)
        for r in _parse_rows(path, with_track=True)
    ]


def format_score(score: float) -> str:
    return f"{score:.6f}"


def write_detections(path, detections: dict[int, list[Detection]]):
    lines = []
    for frame in sorted(detections):
        for d in detections[frame]:
            for class_id, score in d.labels.items():
                m = d.mask
                lines.append(
                    f"{frame} {class_id} {format_score(score)} {m.height} {m.width} "
                    f"{compressed_rle_encode(m)}"
                )
    _write_lines(path, lines)


def tracks_to_observations(tracks: Iterable[Tracklet]) -> list[TrackObservation]:
    obs = []
    for t in tracks:
        cls = t.class_id
        for f, d in t.entries:
            obs.append(TrackObservation(f, t.id, cls, d.mask, d.score))
    obs.sort(key=lambda o: (o.frame, o.track_id))
    return obs


def write_tracks(path, observations: Iterable[TrackObservation]):
    lines = []
    for o in sorted(observations, key=lambda o: (o.frame, o.track_id)):
        m = o.mask
        lines.append(
            f"{o.frame} {o.track_id} {o.class_id} {format_score(o.score)} "
            f"{m.height} {m.width} {compressed_rle_encode(m)}"
        )
    _write_lines(path, lines)


def _write_lines(path, lines):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(line + "\n" for line in lines))


def read_meta(path) -> VideoMeta:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputFormatError(path, [(lineno, "expected 'key = value'")])
        k, v = (s.strip() for s in line.split("=", 1))
        values[k] = v
    try:
        return VideoMeta(float(values["fps"]), int(values["height"]), int(values["width"]))
    except KeyError as exc:
        raise InputFormatError(path, [(0, f"missing key {exc.args[0]}")]) from None


def write_meta(path, meta: VideoMeta):
    _write_lines(path, [f"fps = {meta.fps:g}", f"height = {meta.height}", f"width = {meta.width}"])


def frame_files(directory) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in FRAME_SUFFIXES)


def read_frames(directory) -> list[np.ndarray]:
    """Frames of a video, in file name order, as float gray images in [0, 1]."""
    frames = []
    for p in frame_files(directory):
        with Image.open(p) as img:
            arr = np.asarray(img.convert("L" if img.mode in ("L", "I", "1") else "RGB"))
        if arr.ndim == 3:
            arr = arr[..., 0] * 0.299 + arr[..., 1] * 0.587 + arr[..., 2] * 0.114
        frames.append(np.asarray(arr, dtype=np.float64) / 255.0)
    return frames


def write_frames(directory, frames: Iterable[np.ndarray]):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for t, f in enumerate(frames):
        px = np.clip(np.rint(np.asarray(f) * 255.0), 0, 255).astype(np.uint8)
        Image.fromarray(px, mode="L").save(directory / f"{t:06d}.pgm")
