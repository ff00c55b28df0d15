"""Compare short-term only, full (geometric propagator) and oracle-propagator
tracking on synthetic scenes whose objects lose their detections for a while.

    python scripts/fragmentation_suite.py --scenes 10 --seed 500
"""
import argparse

import numpy as np

from mentos.config import PipelineConfig
from mentos.formats import tracks_to_observations
from mentos.glta import VideoMeta, greedy_merge, prune_low_confidence
from mentos.metrics import evaluate
from mentos.pipeline import run_pipeline
from mentos.synth import GroundTruthPropagator, lane_scene, render


def scene(rng, index, frames, size):
    k = int(rng.integers(1, 5))
    gaps = []
    for tid in range(1, k + 1):
        length = int(rng.integers(5, 16))
        first = int(rng.integers(8, frames - 8 - length))
        gaps.append((tid, first, first + length - 1))
    return lane_scene(k, num_frames=frames, size=size, seed=index, gaps=gaps)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenes", type=int, default=10)
    ap.add_argument("--seed", type=int, default=500)
    ap.add_argument("--frames", type=int, default=60)
    ap.add_argument("--size", type=int, default=256)
    args = ap.parse_args()

    cfg = PipelineConfig()
    rng = np.random.default_rng(args.seed)
    rows = []
    print(f"{'scene':>5} {'k':>2} {'STA AssA':>9} {'full AssA':>9} {'oracle AssA':>11} {'full HOTA':>9}")
    for i in range(args.scenes):
        spec = scene(rng, i, args.frames, args.size)
        video = render(spec)
        meta = VideoMeta(spec.fps, spec.height, spec.width)
        result = run_pipeline(video.frames, video.detections, meta, cfg)
        sta = prune_low_confidence(result.tracklets, cfg.score_floor)
        oracle = prune_low_confidence(
            greedy_merge(result.tracklets, GroundTruthPropagator(video.gt, spec.height, spec.width), meta),
            cfg.score_floor,
        )
        scores = [evaluate(video.gt, tracks_to_observations(t)) for t in (sta, result.tracks, oracle)]
        rows.append([s.AssA for s in scores] + [scores[1].HOTA])
        print(f"{i:>5} {len(spec.objects):>2} {scores[0].AssA:9.3f} {scores[1].AssA:9.3f} "
              f"{scores[2].AssA:11.3f} {scores[1].HOTA:9.3f}")
    mean = np.mean(rows, axis=0)
    print(f"{'mean':>5} {'':>2} {mean[0]:9.3f} {mean[1]:9.3f} {mean[2]:11.3f} {mean[3]:9.3f}")


if __name__ == "__main__":
    main()
