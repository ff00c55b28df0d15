import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mentos.mask import rle_encode
from mentos.sta import Detection, Tracklet


def box(h, w, y0, x0, y1, x1):
    """Mask with rows y0:y1 and columns x0:x1 set."""
    g = np.zeros((h, w), dtype=bool)
    g[y0:y1, x0:x1] = True
    return rle_encode(g)


def make_tracklet(tid, frames, masks=None, cls=1, scores=None, canvas=(32, 32)):
    if masks is None:
        masks = [box(*canvas, 4, 4, 10, 10)] * len(frames)
    if scores is None:
        scores = [1.0] * len(frames)
    t = Tracklet(tid)
    for f, m, s in zip(frames, masks, scores):
        t.append(Detection(f, m, {cls: s}))
    return t


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
