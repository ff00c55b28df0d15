"""End-to-end tracking: filter, merge classes, short-term, long-term, prune."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import partial
from typing import Mapping, Sequence

import numpy as np

from .config import PipelineConfig
from .flow import estimate_flow
from .glta import VideoMeta, greedy_merge, prune_low_confidence
from .propagation import ExternalHeatmapAdapter, GeometricPropagator, Propagator
from .sta import Detection, Tracklet, build_tracklets, filter_detections, merge_multiclass

log = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    tracklets: list[Tracklet]
    tracks: list[Tracklet]


def prepare_detections(
    detections: Mapping[int, Sequence[Detection]], cfg: PipelineConfig
) -> dict[int, list[Detection]]:
    out = {}
    for frame in sorted(detections):
        kept = filter_detections(detections[frame], cfg.theta_d, cfg.theta_a)
        kept = merge_multiclass(kept, cfg.theta_miou)
        if kept:
            out[frame] = kept
    return out


def make_propagator(cfg: PipelineConfig, frames, video: str = "", shape=None) -> Propagator:
    if cfg.propagator == "geometric":
        return GeometricPropagator(frames, cfg.search_radius, cfg.blur_sigma)
    root = cfg.propagator.split(":", 1)[1]
    return ExternalHeatmapAdapter(root, video, shape)


def run_pipeline(
    frames: Sequence[np.ndarray],
    detections: Mapping[int, Sequence[Detection]],
    meta: VideoMeta,
    cfg: PipelineConfig = PipelineConfig(),
    propagator: Propagator | None = None,
) -> PipelineResult:
    """Track one video. ``propagator`` defaults to the one named in ``cfg``."""
    dets = prepare_detections(detections, cfg)
    flow_fn = partial(estimate_flow, levels=cfg.flow_levels, window=cfg.flow_window)
    tracklets = build_tracklets(frames, dets, cfg.theta_s, flow_fn)
    if cfg.long_term:
        if propagator is None:
            propagator = make_propagator(cfg, frames, shape=(meta.height, meta.width))
        tracks = greedy_merge(
            tracklets,
            propagator,
            meta,
            cfg.theta_l,
            cfg.tau_t,
            cfg.tau_s,
            cfg.tau_o,
            cfg.n_far,
            cfg.n_fallback,
        )
    else:
        tracks = [Tracklet(t.id, list(t.entries)) for t in tracklets]
    tracks = prune_low_confidence(tracks, cfg.score_floor)
    log.info("%d tracklets -> %d tracks", len(tracklets), len(tracks))
    return PipelineResult(tracklets, tracks)
