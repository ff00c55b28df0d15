"""Detection filtering and short-term association into tracklets."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .assignment import solve_assignment
from .flow import FlowField, estimate_flow, warp_mask
from .mask import BinaryMask, FrameMaskSet, iou_matrix, mask_iou, resolve_overlaps

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Detection:
    frame: int
    mask: BinaryMask
    labels: Mapping[int, float]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("a detection needs at least one label")
        object.__setattr__(self, "labels", dict(sorted(self.labels.items())))

    @property
    def score(self) -> float:
        return max(self.labels.values())

    @property
    def top_class(self) -> int:
        # Highest score, then lowest class id.
        return min(self.labels, key=lambda c: (-self.labels[c], c))


@dataclass
class Tracklet:
    id: int
    entries: list[tuple[int, Detection]] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    @property
    def frames(self) -> list[int]:
        return [f for f, _ in self.entries]

    @property
    def start(self) -> int:
        return self.entries[0][0]

    @property
    def end(self) -> int:
        return self.entries[-1][0]

    @property
    def max_score(self) -> float:
        return max(d.score for _, d in self.entries)

    @property
    def class_id(self) -> int:
        return dominant_class(self)

    def append(self, det: Detection):
        if self.entries and det.frame <= self.end:
            raise ValueError(f"tracklet {self.id}: frame {det.frame} after {self.end}")
        self.entries.append((det.frame, det))


def filter_detections(dets: Sequence[Detection], theta_d: float, theta_a: int) -> list[Detection]:
    return [d for d in dets if d.score > theta_d and d.mask.area > theta_a]


def merge_multiclass(dets: Sequence[Detection], theta_miou: float) -> list[Detection]:
    """Collapse groups of same-frame masks overlapping above ``theta_miou``.

    Groups are connected components of the overlap graph. A group keeps the
    mask of its best-scoring member and the union of all labels.
    """
    n = len(dets)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if mask_iou(dets[i].mask, dets[j].mask) > theta_miou:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)

    out = []
    for members in groups.values():
        if len(members) == 1:
            out.append(dets[members[0]])
            continue
        best = min(members, key=lambda i: (-dets[i].score, i))
        labels: dict[int, float] = {}
        for i in members:
            for c, s in dets[i].labels.items():
                labels[c] = max(labels.get(c, 0.0), s)
        out.append(Detection(dets[best].frame, dets[best].mask, labels))
    return out


def dominant_class(t: Tracklet) -> int:
    """Most frequent top label; ties by summed score, then lowest class id."""
    if not t.entries:
        raise ValueError("dominant class of an empty tracklet")
    count: dict[int, int] = {}
    mass: dict[int, float] = {}
    for _, d in t.entries:
        c = d.top_class
        count[c] = count.get(c, 0) + 1
        mass[c] = mass.get(c, 0.0) + d.labels[c]
    return min(count, key=lambda c: (-count[c], -mass[c], c))


@dataclass(frozen=True)
class Match:
    prev: int
    det: int
    iou: float


def associate_frames(
    prev_masks: Sequence[BinaryMask],
    flow: FlowField,
    next_dets: Sequence[Detection],
    theta_s: float,
) -> tuple[list[Match], list[int]]:
    """Match warped previous masks to next-frame detections.

    Returns the accepted matches (indices into ``prev_masks`` and
    ``next_dets``) and the indices of the detections left unmatched.
    """
    if not prev_masks or not next_dets:
        return [], list(range(len(next_dets)))
    warped = [warp_mask(m, flow) for m in prev_masks]
    ious = iou_matrix(warped, [d.mask for d in next_dets])
    matches = [
        Match(i, j, float(ious[i, j]))
        for i, j in solve_assignment(-ious)
        if ious[i, j] > theta_s
    ]
    taken = {m.det for m in matches}
    return matches, [j for j in range(len(next_dets)) if j not in taken]


FlowFn = Callable[[np.ndarray, np.ndarray], FlowField]


def build_tracklets(
    frames: Sequence[np.ndarray],
    detections: Mapping[int, Sequence[Detection]],
    theta_s: float = 0.15,
    flow_fn: FlowFn | None = None,
) -> list[Tracklet]:
    """Link per-frame detections into tracklets of length >= 2.

    ``detections`` maps frame index to already filtered and class-merged
    detections. ``frames[t]`` is the image of frame t.
    """
    if flow_fn is None:
        flow_fn = estimate_flow
    tracklets: list[Tracklet] = []
    active: list[Tracklet] = []
    prev_t = None
    for t in range(len(frames)):
        dets = list(detections.get(t, ()))
        extended: list[Tracklet] = []
        unmatched = list(range(len(dets)))
        if active and dets and prev_t == t - 1:
            flow = flow_fn(frames[t - 1], frames[t])
            matches, unmatched = associate_frames(
                [tr.entries[-1][1].mask for tr in active], flow, dets, theta_s
            )
            for m in matches:
                active[m.prev].append(dets[m.det])
                extended.append(active[m.prev])
        for j in unmatched:
            tr = Tracklet(len(tracklets) + 1)
            tr.append(dets[j])
            tracklets.append(tr)
            extended.append(tr)
        active = sorted(extended, key=lambda tr: tr.id)
        prev_t = t

    _remove_overlaps(tracklets)
    kept = [tr for tr in tracklets if len(tr) >= 2]
    log.debug("STA: %d tracklets, %d after singleton pruning", len(tracklets), len(kept))
    return kept


def _remove_overlaps(tracklets: list[Tracklet]):
    by_frame: dict[int, list[tuple[Tracklet, int]]] = {}
    for tr in tracklets:
        for k, (f, _) in enumerate(tr.entries):
            by_frame.setdefault(f, []).append((tr, k))
    for f, refs in by_frame.items():
        if len(refs) < 2:
            continue
        fs = FrameMaskSet(f, [(tr.entries[k][1].mask, tr.entries[k][1].score) for tr, k in refs])
        for (tr, k), (m, _) in zip(refs, resolve_overlaps(fs).masks):
            det = tr.entries[k][1]
            if m is not det.mask:
                tr.entries[k] = (f, dataclasses.replace(det, mask=m))
    for tr in tracklets:
        tr.entries = [(f, d) for f, d in tr.entries if d.mask.area > 0]
