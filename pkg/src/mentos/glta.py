"""Greedy long-term association of tracklets across temporal gaps."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .mask import BinaryMask, MaskError, mask_center
from .propagation import HEAD, TAIL, PropagationError, Propagator
from .sta import Tracklet

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VideoMeta:
    fps: float
    height: int
    width: int

    def __post_init__(self):
        if not (self.fps > 0 and self.height > 0 and self.width > 0):
            raise ValueError(f"invalid video metadata {self}")


def order_pair(ta: Tracklet, tb: Tracklet) -> tuple[Tracklet, Tracklet]:
    """Earlier-starting tracklet first; equal starts put the lower id first."""
    return (ta, tb) if (ta.start, ta.id) <= (tb.start, tb.id) else (tb, ta)


def temporal_cost(ta: Tracklet, tb: Tracklet, meta: VideoMeta) -> float:
    """Seconds between the last mask of ``ta`` and the first mask of ``tb``."""
    return abs(ta.end - tb.start) / meta.fps


def spatial_cost(ta: Tracklet, tb: Tracklet, meta: VideoMeta) -> float:
    ax, ay = mask_center(ta.entries[-1][1].mask)
    bx, by = mask_center(tb.entries[0][1].mask)
    return 2.0 / (meta.height + meta.width) * (abs(ax - bx) + abs(ay - by))


def overlap_cost(ta: Tracklet, tb: Tracklet) -> int:
    return len(set(ta.frames) & set(tb.frames))


def is_admissible(ta, tb, meta, tau_t=1.5, tau_s=0.2, tau_o=1) -> bool:
    if ta.class_id != tb.class_id:
        return False
    return (
        temporal_cost(ta, tb, meta) <= tau_t
        and spatial_cost(ta, tb, meta) <= tau_s
        and overlap_cost(ta, tb) <= tau_o
    )


def select_reference_indices(t: Tracklet, side: str, n: int = 5, fallback: int = 2) -> list[int]:
    """0-based entry indices used as propagation references.

    The tail side uses the last entry plus the one n+1 before it; the head
    side uses the first entry plus the n-th. If n does not fit, ``fallback``
    is tried, then only the boundary entry is returned.
    """
    length = len(t)
    if length < 1:
        raise ValueError("empty tracklet")
    for step in (n, fallback):
        if side == TAIL:
            far = length - step - 1  # 1-based position N - n - 1
            if far >= 1:
                return [length - 1, far - 1]
        elif side == HEAD:
            if step <= length and step > 1:
                return [0, step - 1]
        else:
            raise ValueError(f"unknown side {side!r}")
    return [length - 1] if side == TAIL else [0]


def cosine_similarity(heatmap: np.ndarray, mask: BinaryMask) -> float:
    h = np.asarray(heatmap, dtype=np.float64)
    if h.shape != mask.shape:
        raise MaskError(f"heatmap {h.shape} vs mask {mask.shape}")
    m = mask.array
    h_norm = math.sqrt(float(np.sum(h * h)))
    if h_norm == 0.0 or mask.area == 0:
        return 0.0
    return float(h[m].sum()) / (h_norm * math.sqrt(mask.area))


def tracklet_similarity(
    ta: Tracklet, tb: Tracklet, propagator: Propagator, n: int = 5, fallback: int = 2
) -> float:
    """Mean cosine similarity between propagated heatmaps and the true masks.

    The tail references of ``ta`` are propagated to the head reference frames
    of ``tb`` and the head references of ``tb`` to the tail frames of ``ta``.
    Raises PropagationError when the propagator fails.
    """
    tail = [ta.entries[k] for k in select_reference_indices(ta, TAIL, n, fallback)]
    head = [tb.entries[k] for k in select_reference_indices(tb, HEAD, n, fallback)]
    tail_memory = [(f, d.mask) for f, d in tail]
    head_memory = [(f, d.mask) for f, d in head]

    scores = []
    for f, d in head:
        heat = propagator.propagate(tail_memory, f, tracklet_id=ta.id, side=TAIL)
        scores.append(cosine_similarity(heat, d.mask))
    for f, d in tail:
        heat = propagator.propagate(head_memory, f, tracklet_id=tb.id, side=HEAD)
        scores.append(cosine_similarity(heat, d.mask))
    return sum(scores) / len(scores)


@dataclass(frozen=True)
class AdmissiblePair:
    first: int
    second: int
    similarity: float


def admissible_pairs(
    tracklets: Sequence[Tracklet],
    meta: VideoMeta,
    propagator: Propagator,
    tau_t=1.5,
    tau_s=0.2,
    tau_o=1,
    n=5,
    fallback=2,
) -> list[AdmissiblePair]:
    pairs = []
    for i, a in enumerate(tracklets):
        for b in tracklets[i + 1 :]:
            ta, tb = order_pair(a, b)
            if not is_admissible(ta, tb, meta, tau_t, tau_s, tau_o):
                continue
            try:
                sim = tracklet_similarity(ta, tb, propagator, n, fallback)
            except PropagationError as exc:
                log.warning("skipping pair (%d, %d): %s", ta.id, tb.id, exc)
                sim = -math.inf
            pairs.append(AdmissiblePair(ta.id, tb.id, sim))
    return pairs


def merge_entries(a: Tracklet, b: Tracklet, new_id: int) -> Tracklet:
    """Union of entries; a shared frame keeps the higher-scoring detection."""
    by_frame = dict(a.entries)
    for f, d in b.entries:
        if f not in by_frame or d.score > by_frame[f].score:
            by_frame[f] = d
    return Tracklet(new_id, sorted(by_frame.items(), key=lambda e: e[0]))


def greedy_merge(
    tracklets: Sequence[Tracklet],
    propagator: Propagator,
    meta: VideoMeta,
    theta_l: float = 0.30,
    tau_t: float = 1.5,
    tau_s: float = 0.2,
    tau_o: int = 1,
    n: int = 5,
    fallback: int = 2,
    pairs: Sequence[AdmissiblePair] | None = None,
) -> list[Tracklet]:
    """Merge admissible pairs in decreasing similarity while above ``theta_l``.

    Similarities are computed once; the frame-overlap constraint is checked
    again against the merged tracks before each merge. A merged track takes
    the id of its earliest member.
    """
    if pairs is None:
        pairs = admissible_pairs(tracklets, meta, propagator, tau_t, tau_s, tau_o, n, fallback)
    groups: dict[int, Tracklet] = {t.id: Tracklet(t.id, list(t.entries)) for t in tracklets}
    parent = {t.id: t.id for t in tracklets}

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for p in sorted(pairs, key=lambda p: (-p.similarity, p.first, p.second)):
        if not p.similarity > theta_l:
            break
        ra, rb = find(p.first), find(p.second)
        if ra == rb:
            continue
        a, b = order_pair(groups[ra], groups[rb])
        if overlap_cost(a, b) > tau_o:
            continue
        merged = merge_entries(a, b, a.id)
        log.debug("merge %d <- %d (similarity %.3f)", a.id, b.id, p.similarity)
        parent[b.id] = a.id
        groups[a.id] = merged
        del groups[b.id]

    return sorted(groups.values(), key=lambda t: (t.start, t.id))


def prune_low_confidence(tracks: Sequence[Tracklet], floor: float = 0.90) -> list[Tracklet]:
    return [t for t in tracks if not t.max_score < floor]
