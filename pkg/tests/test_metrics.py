import itertools
import math

import numpy as np
import pytest

from conftest import box
from mentos.mask import iou_matrix
from mentos.metrics import ALPHAS, TrackObservation, evaluate, match_frame

H = W = 64


def square(x, y, s=10):
    return box(H, W, y, x, y + s, x + s)


def track(tid, frames, x=5, y=5, cls=1, dx=0):
    return [TrackObservation(f, tid, cls, square(x + dx * f, y)) for f in frames]


def test_alpha_grid():
    assert len(ALPHAS) == 19 and ALPHAS[0] == 0.05 and ALPHAS[-1] == 0.95


def test_perfect_predictions():
    gt = track(1, range(10)) + track(2, range(3, 8), x=30, y=30)
    r = evaluate(gt, gt)
    assert r.HOTA == 1.0 and r.DetA == 1.0 and r.AssA == 1.0
    assert all(d == 1.0 for d in r.deta)


def test_no_predictions():
    r = evaluate(track(1, range(5)), [])
    assert r.DetA == 0.0 and r.HOTA == 0.0


def test_empty_ground_truth():
    assert evaluate([], []).HOTA == 1.0
    assert evaluate([], track(1, range(3))).HOTA == 0.0


def test_match_frame_crossed_ious():
    gt = [square(0, 0), square(6, 0)]
    pred = [square(4, 0), square(1, 0)]
    ious = iou_matrix(gt, pred)
    best = max(itertools.permutations(range(2)), key=lambda p: ious[0, p[0]] + ious[1, p[1]])
    assert match_frame(gt, pred, 0.05) == [(0, best[0]), (1, best[1])]


def test_match_frame_respects_alpha():
    gt, pred = [square(0, 0)], [square(5, 0)]  # IoU 50/150
    assert match_frame(gt, pred, 0.30) == [(0, 0)]
    assert match_frame(gt, pred, 0.35) == []


def test_two_fragments():
    gt = track(1, range(10))
    pred = track(7, range(5)) + track(8, range(5, 10))
    r = evaluate(gt, pred)
    assert r.deta == [1.0] * 19
    assert r.assa == [0.5] * 19
    assert all(h == pytest.approx(math.sqrt(0.5), abs=1e-15) for h in r.hota)


def test_identity_swap():
    # Each predicted id covers half of each gt track: A(c) = 5 / (10 + 10 - 5).
    gt = track(1, range(10), y=5) + track(2, range(10), y=40)
    pred = (
        [TrackObservation(f, 7, 1, square(5, 5 if f < 5 else 40)) for f in range(10)]
        + [TrackObservation(f, 8, 1, square(5, 40 if f < 5 else 5)) for f in range(10)]
    )
    r = evaluate(gt, pred)
    assert r.deta == [1.0] * 19
    assert r.assa == pytest.approx([1 / 3] * 19, abs=1e-15)


def test_hota_is_geometric_mean():
    gt = track(1, range(10)) + track(2, range(10), x=40)
    pred = [TrackObservation(o.frame, o.track_id, 1, square(7, 5)) for o in gt[:10]] + track(3, range(2, 6), x=40)
    r = evaluate(gt, pred)
    for h, d, a in zip(r.hota, r.deta, r.assa):
        assert h == pytest.approx(math.sqrt(d * a), abs=1e-15)
        assert 0.0 <= h <= 1.0


def test_hota_non_increasing_in_alpha(rng):
    for _ in range(10):
        gt, pred = [], []
        for tid in range(3):
            x0, y0 = rng.integers(0, 40, size=2)
            for f in range(8):
                gt.append(TrackObservation(f, tid, 1, square(int(x0), int(y0))))
                if rng.random() < 0.8:
                    jx, jy = rng.integers(-4, 5, size=2)
                    pid = tid if f < 4 else tid + 10 * int(rng.integers(0, 2))
                    pred.append(TrackObservation(f, pid, 1, square(int(np.clip(x0 + jx, 0, 54)), int(np.clip(y0 + jy, 0, 54)))))
        r = evaluate(gt, pred)
        assert all(a >= b - 1e-12 for a, b in zip(r.hota, r.hota[1:]))
        assert all(a >= b for a, b in zip(r.deta, r.deta[1:]))


def test_merging_fragments_never_lowers_assa():
    gt = track(1, range(12)) + track(2, range(12), x=40)
    split = track(5, range(6)) + track(6, range(6, 12)) + track(7, range(12), x=40)
    merged = track(5, range(12)) + track(7, range(12), x=40)
    more_split = track(5, range(3)) + track(8, range(3, 6)) + track(6, range(6, 12)) + track(7, range(12), x=40)
    a_split, a_merged, a_more = (evaluate(gt, p).AssA for p in (split, merged, more_split))
    assert a_merged >= a_split >= a_more


def test_classes_macro_averaged():
    gt = track(1, range(4), cls=1) + track(2, range(4), x=40, cls=2)
    pred = track(1, range(4), cls=1)  # class 2 entirely missed
    r = evaluate(gt, pred)
    assert r.DetA == pytest.approx(0.5)
    assert r.AssA == pytest.approx(0.5)
    # Wrong class never matches.
    assert evaluate(track(1, range(4), cls=1), track(1, range(4), cls=2)).DetA == 0.0


def test_reports():
    r = evaluate(track(1, range(3)), track(1, range(3)))
    kv = dict(line.split("=") for line in r.to_keyvalue().splitlines())
    assert kv["HOTA"] == "1.000000000" and "AssA@0.50" in kv
    assert r.to_text().startswith("HOTA 100.00")
