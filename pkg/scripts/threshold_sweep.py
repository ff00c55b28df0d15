"""Sweep the long-term merge threshold on noisy synthetic scenes and report
HOTA/DetA/AssA for each value.

    python scripts/threshold_sweep.py --values 0.1 0.3 0.5 0.7 0.9
"""
import argparse

from mentos.config import PipelineConfig
from mentos.formats import tracks_to_observations
from mentos.glta import VideoMeta
from mentos.metrics import evaluate
from mentos.pipeline import run_pipeline
from mentos.synth import lane_scene, render


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--values", type=float, nargs="+", default=[0.1, 0.2, 0.3, 0.5, 0.7, 0.9])
    ap.add_argument("--objects", type=int, default=4)
    ap.add_argument("--dropout", type=float, default=0.1)
    args = ap.parse_args()

    spec = lane_scene(args.objects, seed=3, gaps=[(1, 15, 24), (3, 30, 41)])
    spec.dropout = args.dropout
    spec.score_noise = 0.03
    video = render(spec)
    meta = VideoMeta(spec.fps, spec.height, spec.width)
    print(f"{'theta_l':>7} {'tracks':>6} {'HOTA':>6} {'DetA':>6} {'AssA':>6}")
    for value in args.values:
        result = run_pipeline(video.frames, video.detections, meta, PipelineConfig(theta_l=value))
        r = evaluate(video.gt, tracks_to_observations(result.tracks))
        print(f"{value:7.2f} {len(result.tracks):6d} {r.HOTA:6.3f} {r.DetA:6.3f} {r.AssA:6.3f}")


if __name__ == "__main__":
    main()
