"""Synthetic videos of textured moving shapes with exact ground truth.

Scene files are line oriented, ``#`` starts a comment::

    canvas 256 256          # height width
    fps 30
    frames 60
    seed 7
    object shape=rect size=24x20 texture=11 class=1 path=0:40,40/59:200,40
    object shape=disk size=12 texture=12 class=1 path=0:60,120/59:60,200
    occluder 120 0 136 256  # x0 y0 x1 y1, half-open
    dropout 0.0
    score_noise 0.0
    gap 1 20 24             # track id, first frame, last frame (inclusive)

Objects get track ids 1, 2, ... in file order; earlier objects are drawn in
front of later ones. Rect size is width x height, disk size is the radius.
An object exists only between its first and last waypoint frames.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .mask import BinaryMask, mask_iou, rle_encode
from .metrics import TrackObservation
from .sta import Detection

BACKGROUND = 0.1


class SceneError(ValueError):
    pass


@dataclass
class ObjectSpec:
    shape: str
    size: tuple[int, ...]
    texture_seed: int
    class_id: int
    waypoints: list[tuple[int, float, float]]

    def footprint(self) -> np.ndarray:
        if self.shape == "rect":
            w, h = self.size
            return np.ones((h, w), dtype=bool)
        r = self.size[0]
        yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
        return xx * xx + yy * yy <= r * r

    def texture(self) -> np.ndarray:
        fp = self.footprint()
        rng = np.random.default_rng(self.texture_seed)
        noise = ndimage.gaussian_filter(rng.random(fp.shape), 1.0, mode="wrap")
        lo, hi = noise.min(), noise.max()
        return 0.35 + 0.65 * (noise - lo) / (hi - lo if hi > lo else 1.0)

    def center(self, frame: int) -> tuple[float, float] | None:
        wps = self.waypoints
        if frame < wps[0][0] or frame > wps[-1][0]:
            return None
        for (f0, x0, y0), (f1, x1, y1) in zip(wps, wps[1:]):
            if f0 <= frame <= f1:
                a = (frame - f0) / (f1 - f0) if f1 > f0 else 0.0
                return x0 + a * (x1 - x0), y0 + a * (y1 - y0)
        return wps[-1][1], wps[-1][2]


@dataclass
class SceneSpec:
    height: int = 256
    width: int = 256
    fps: float = 30.0
    num_frames: int = 60
    objects: list[ObjectSpec] = field(default_factory=list)
    occluders: list[tuple[int, int, int, int]] = field(default_factory=list)
    dropout: float = 0.0
    score_noise: float = 0.0
    gaps: list[tuple[int, int, int]] = field(default_factory=list)
    seed: int = 0

    def validate(self):
        if self.height <= 0 or self.width <= 0 or self.num_frames <= 0 or self.fps <= 0:
            raise SceneError("canvas, fps and frame count must be positive")
        if not 0.0 <= self.dropout <= 1.0:
            raise SceneError(f"dropout {self.dropout} outside [0, 1]")
        if self.score_noise < 0:
            raise SceneError("score_noise must be non-negative")
        for k, obj in enumerate(self.objects, start=1):
            if obj.shape not in ("rect", "disk"):
                raise SceneError(f"object {k}: unknown shape {obj.shape!r}")
            if len(obj.size) != (2 if obj.shape == "rect" else 1) or min(obj.size) <= 0:
                raise SceneError(f"object {k}: bad size {obj.size}")
            if not obj.waypoints:
                raise SceneError(f"object {k}: no waypoints")
            frames = [w[0] for w in obj.waypoints]
            if frames != sorted(frames):
                raise SceneError(f"object {k}: waypoints out of order")
            for f, x, y in obj.waypoints:
                if not (0 <= x < self.width and 0 <= y < self.height):
                    raise SceneError(f"object {k}: waypoint ({x}, {y}) outside canvas")
        for tid, first, last in self.gaps:
            if not 1 <= tid <= len(self.objects):
                raise SceneError(f"gap refers to unknown object {tid}")
            if first > last:
                raise SceneError(f"gap {first}-{last} is empty")


@dataclass
class SyntheticVideo:
    frames: list[np.ndarray]
    gt: list[TrackObservation]
    detections: dict[int, list[Detection]]
    spec: SceneSpec


def _place(obj: ObjectSpec, frame: int, height: int, width: int):
    """Canvas-sized (footprint, texture) for ``obj`` at ``frame``, or None."""
    c = obj.center(frame)
    if c is None:
        return None
    fp = obj.footprint()
    tex = obj.texture()
    fh, fw = fp.shape
    top = int(np.floor(c[1] - fh / 2 + 0.5))
    left = int(np.floor(c[0] - fw / 2 + 0.5))
    full_fp = np.zeros((height, width), dtype=bool)
    full_tex = np.zeros((height, width))
    y0, y1 = max(top, 0), min(top + fh, height)
    x0, x1 = max(left, 0), min(left + fw, width)
    if y0 >= y1 or x0 >= x1:
        return None
    sl = (slice(y0 - top, y1 - top), slice(x0 - left, x1 - left))
    full_fp[y0:y1, x0:x1] = fp[sl]
    full_tex[y0:y1, x0:x1] = tex[sl]
    return full_fp, full_tex


def render(spec: SceneSpec) -> SyntheticVideo:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    occluded = np.zeros((spec.height, spec.width), dtype=bool)
    for x0, y0, x1, y1 in spec.occluders:
        occluded[max(y0, 0) : y1, max(x0, 0) : x1] = True
    gaps = {(tid, f) for tid, first, last in spec.gaps for f in range(first, last + 1)}

    frames, gt = [], []
    detections: dict[int, list[Detection]] = {}
    for t in range(spec.num_frames):
        img = np.full((spec.height, spec.width), BACKGROUND)
        covered = occluded.copy()
        visible: list[tuple[int, np.ndarray]] = []
        for tid, obj in enumerate(spec.objects, start=1):
            placed = _place(obj, t, spec.height, spec.width)
            if placed is None:
                continue
            fp, tex = placed
            vis = fp & ~covered
            img[vis] = tex[vis]
            covered |= fp
            if vis.any():
                visible.append((tid, vis))
        img[occluded] = 0.0
        frames.append(img)

        dets = []
        for tid, vis in visible:
            mask = rle_encode(vis)
            obj = spec.objects[tid - 1]
            gt.append(TrackObservation(t, tid, obj.class_id, mask, 1.0))
            # Always draw both numbers so the stream does not depend on gaps.
            drop = rng.random() < spec.dropout
            noise = abs(rng.normal(0.0, spec.score_noise)) if spec.score_noise > 0 else 0.0
            if drop or (tid, t) in gaps:
                continue
            score = float(np.clip(1.0 - noise, 0.0, 1.0))
            dets.append(Detection(t, mask, {obj.class_id: score}))
        if dets:
            detections[t] = dets
    return SyntheticVideo(frames, gt, detections, spec)


def _parse_object(tokens: list[str]) -> ObjectSpec:
    kv = {}
    for tok in tokens:
        if "=" not in tok:
            raise SceneError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        kv[k] = v
    missing = {"shape", "size", "path"} - kv.keys()
    if missing:
        raise SceneError(f"object is missing {sorted(missing)}")
    size = tuple(int(s) for s in kv["size"].split("x"))
    waypoints = []
    for wp in kv["path"].split("/"):
        f, xy = wp.split(":")
        x, y = xy.split(",")
        waypoints.append((int(f), float(x), float(y)))
    return ObjectSpec(
        kv["shape"], size, int(kv.get("texture", 0)), int(kv.get("class", 1)), waypoints
    )


def parse_scene(text: str) -> SceneSpec:
    spec = SceneSpec()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        try:
            if key == "canvas":
                spec.height, spec.width = int(args[0]), int(args[1])
            elif key == "fps":
                spec.fps = float(args[0])
            elif key == "frames":
                spec.num_frames = int(args[0])
            elif key == "seed":
                spec.seed = int(args[0])
            elif key == "object":
                spec.objects.append(_parse_object(args))
            elif key == "occluder":
                spec.occluders.append(tuple(int(a) for a in args[:4]))
            elif key == "dropout":
                spec.dropout = float(args[0])
            elif key == "score_noise":
                spec.score_noise = float(args[0])
            elif key == "gap":
                spec.gaps.append((int(args[0]), int(args[1]), int(args[2])))
            else:
                raise SceneError(f"unknown key {key!r}")
        except (IndexError, ValueError) as exc:
            raise SceneError(f"line {lineno}: {exc}") from exc
    spec.validate()
    return spec


def format_scene(spec: SceneSpec) -> str:
    lines = [
        f"canvas {spec.height} {spec.width}",
        f"fps {spec.fps:g}",
        f"frames {spec.num_frames}",
        f"seed {spec.seed}",
    ]
    for obj in spec.objects:
        path = "/".join(f"{f}:{x:g},{y:g}" for f, x, y in obj.waypoints)
        size = "x".join(str(s) for s in obj.size)
        lines.append(
            f"object shape={obj.shape} size={size} texture={obj.texture_seed} "
            f"class={obj.class_id} path={path}"
        )
    lines += [f"occluder {x0} {y0} {x1} {y1}" for x0, y0, x1, y1 in spec.occluders]
    lines.append(f"dropout {spec.dropout:g}")
    lines.append(f"score_noise {spec.score_noise:g}")
    lines += [f"gap {tid} {a} {b}" for tid, a, b in spec.gaps]
    return "\n".join(lines) + "\n"


def load_scene(path) -> SceneSpec:
    return parse_scene(Path(path).read_text())


def lane_scene(
    k: int,
    num_frames: int = 60,
    size: int = 256,
    speed: float = 2.0,
    seed: int = 0,
    gaps: list[tuple[int, int, int]] | None = None,
    fps: float = 30.0,
) -> SceneSpec:
    """k rectangles moving horizontally in separate lanes, alternating direction."""
    lane = size / (k + 1)
    objects = []
    for i in range(k):
        y = lane * (i + 1)
        travel = speed * (num_frames - 1)
        start = 0.5 * (size - travel)
        xs = (start, start + travel) if i % 2 == 0 else (start + travel, start)
        objects.append(
            ObjectSpec(
                "rect",
                (18 + 2 * (i % 3), 14 + 2 * (i % 2)),
                texture_seed=seed * 101 + i + 1,
                class_id=1,
                waypoints=[(0, xs[0], y), (num_frames - 1, xs[1], y)],
            )
        )
    return SceneSpec(
        size, size, fps, num_frames, objects, [], 0.0, 0.0, list(gaps or []), seed
    )


class GroundTruthPropagator:
    """Oracle propagator: returns the true mask of the object a memory
    belongs to, or an all-zero heatmap when that object is absent."""

    def __init__(self, gt: list[TrackObservation], height: int, width: int):
        self.shape = (height, width)
        self.by_frame: dict[int, list[TrackObservation]] = {}
        for o in gt:
            self.by_frame.setdefault(o.frame, []).append(o)

    def identify(self, frame: int, mask: BinaryMask) -> int | None:
        best, best_iou = None, 0.0
        for o in self.by_frame.get(frame, ()):
            iou = mask_iou(o.mask, mask)
            if iou > best_iou:
                best, best_iou = o.track_id, iou
        return best

    def propagate(self, memory, query_frame, *, tracklet_id=None, side=None):
        heat = np.zeros(self.shape)
        for frame, mask in memory:
            tid = self.identify(frame, mask)
            for o in self.by_frame.get(query_frame, ()):
                if o.track_id == tid:
                    heat += o.mask.array
        return heat / len(memory)
