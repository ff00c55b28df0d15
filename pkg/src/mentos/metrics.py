"""HOTA, DetA and AssA for mask tracks.

Simplified from the public definition: per-frame matching maximizes summed
mask IoU among pairs with IoU >= alpha, without the association-aware
matching score of the official toolkit. DetA and AssA are computed per
class and macro-averaged over the classes present in the ground truth;
HOTA is the geometric mean of the averaged DetA and AssA.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .assignment import solve_assignment
from .mask import BinaryMask, iou_matrix

ALPHAS = tuple(round(0.05 * k, 2) for k in range(1, 20))


@dataclass(frozen=True)
class TrackObservation:
    """One mask of one track in one frame."""

    frame: int
    track_id: int
    class_id: int
    mask: BinaryMask
    score: float = 1.0


@dataclass
class EvalResult:
    alphas: tuple[float, ...] = ALPHAS
    deta: list[float] = field(default_factory=list)
    assa: list[float] = field(default_factory=list)
    hota: list[float] = field(default_factory=list)

    @property
    def DetA(self) -> float:
        return float(np.mean(self.deta))

    @property
    def AssA(self) -> float:
        return float(np.mean(self.assa))

    @property
    def HOTA(self) -> float:
        return float(np.mean(self.hota))

    def to_text(self) -> str:
        lines = [f"HOTA {self.HOTA * 100:6.2f}  DetA {self.DetA * 100:6.2f}  AssA {self.AssA * 100:6.2f}"]
        lines.append("alpha   HOTA    DetA    AssA")
        for a, h, d, s in zip(self.alphas, self.hota, self.deta, self.assa):
            lines.append(f"{a:5.2f} {h:7.4f} {d:7.4f} {s:7.4f}")
        return "\n".join(lines) + "\n"

    def to_keyvalue(self) -> str:
        lines = [f"HOTA={self.HOTA:.9f}", f"DetA={self.DetA:.9f}", f"AssA={self.AssA:.9f}"]
        for a, h, d, s in zip(self.alphas, self.hota, self.deta, self.assa):
            lines.append(f"HOTA@{a:.2f}={h:.9f}")
            lines.append(f"DetA@{a:.2f}={d:.9f}")
            lines.append(f"AssA@{a:.2f}={s:.9f}")
        return "\n".join(lines) + "\n"


def match_frame(gt_masks: Sequence[BinaryMask], pred_masks: Sequence[BinaryMask], alpha: float, ious=None):
    """Index pairs (gt, pred) maximizing total IoU over pairs with IoU >= alpha."""
    if not gt_masks or not pred_masks:
        return []
    if ious is None:
        ious = iou_matrix(gt_masks, pred_masks)
    allowed = ious >= alpha - 1e-12
    if not allowed.any():
        return []
    return solve_assignment(-ious, forbidden=~allowed)


def _evaluate_class(gt: list[TrackObservation], pred: list[TrackObservation], alphas):
    frames = sorted({o.frame for o in gt} | {o.frame for o in pred})
    gt_by = defaultdict(list)
    pred_by = defaultdict(list)
    for o in gt:
        gt_by[o.frame].append(o)
    for o in pred:
        pred_by[o.frame].append(o)
    gt_count = Counter(o.track_id for o in gt)
    pred_count = Counter(o.track_id for o in pred)
    ious = {
        f: iou_matrix([o.mask for o in gt_by[f]], [o.mask for o in pred_by[f]])
        for f in frames
        if gt_by[f] and pred_by[f]
    }

    deta, assa = [], []
    for alpha in alphas:
        tp_pairs = []
        for f in frames:
            if f not in ious:
                continue
            g, p = gt_by[f], pred_by[f]
            for i, j in match_frame([o.mask for o in g], [o.mask for o in p], alpha, ious[f]):
                tp_pairs.append((g[i].track_id, p[j].track_id))
        tp = len(tp_pairs)
        fn = len(gt) - tp
        fp = len(pred) - tp
        det = tp / (tp + fn + fp)
        if tp:
            tpa = Counter(tp_pairs)
            ass = math.fsum(
                tpa[c] / (gt_count[c[0]] + pred_count[c[1]] - tpa[c]) for c in tp_pairs
            ) / tp
        else:
            ass = 0.0
        deta.append(det)
        assa.append(ass)
    return deta, assa


def evaluate(
    gt: Iterable[TrackObservation],
    pred: Iterable[TrackObservation],
    alphas: Sequence[float] = ALPHAS,
) -> EvalResult:
    gt = list(gt)
    pred = list(pred)
    classes = sorted({o.class_id for o in gt})
    if not classes:
        value = 1.0 if not pred else 0.0
        n = len(alphas)
        return EvalResult(tuple(alphas), [value] * n, [value] * n, [value] * n)
    per_class = [
        _evaluate_class(
            [o for o in gt if o.class_id == c], [o for o in pred if o.class_id == c], alphas
        )
        for c in classes
    ]
    deta = [float(np.mean([pc[0][k] for pc in per_class])) for k in range(len(alphas))]
    assa = [float(np.mean([pc[1][k] for pc in per_class])) for k in range(len(alphas))]
    hota = [math.sqrt(d * a) for d, a in zip(deta, assa)]
    return EvalResult(tuple(alphas), deta, assa, hota)
