import struct

import numpy as np
import pytest
from scipy import ndimage

from conftest import box
from mentos.propagation import (
    ExternalHeatmapAdapter,
    GeometricPropagator,
    PropagationError,
    heatmap_path,
    read_heatmap,
    write_heatmap,
)


def test_heatmap_file_layout(tmp_path):
    h = np.array([[0.0, 0.25, 1.0], [0.5, 0.75, 0.125]])
    p = tmp_path / "v" / "3_tail_17.hmap"
    write_heatmap(p, h)
    raw = p.read_bytes()
    assert raw[:4] == b"HMAP"
    assert struct.unpack("<II", raw[4:12]) == (3, 2)
    assert struct.unpack("<6f", raw[12:]) == tuple(h.ravel())
    assert np.array_equal(read_heatmap(p), h)


def test_heatmap_clamped_on_load(tmp_path):
    p = tmp_path / "x.hmap"
    write_heatmap(p, np.array([[-0.5, 2.0], [np.nan, 0.5]]))
    assert np.array_equal(read_heatmap(p), [[0.0, 1.0], [0.0, 0.5]])


def test_heatmap_bad_files(tmp_path):
    p = tmp_path / "bad.hmap"
    p.write_bytes(b"NOPE" + bytes(8))
    with pytest.raises(PropagationError):
        read_heatmap(p)
    p.write_bytes(b"HMAP" + struct.pack("<II", 2, 2) + bytes(4))
    with pytest.raises(PropagationError):
        read_heatmap(p)


def test_external_adapter(tmp_path):
    h = np.full((4, 5), 0.5)
    write_heatmap(heatmap_path(tmp_path, "vid", 7, "head", 12), h)
    adapter = ExternalHeatmapAdapter(tmp_path, "vid", (4, 5))
    assert (tmp_path / "vid" / "7_head_12.hmap").exists()
    out = adapter.propagate([], 12, tracklet_id=7, side="head")
    assert np.array_equal(out, h)
    with pytest.raises(PropagationError):
        adapter.propagate([], 13, tracklet_id=7, side="head")
    with pytest.raises(PropagationError):
        ExternalHeatmapAdapter(tmp_path, "vid", (5, 5)).propagate([], 12, tracklet_id=7, side="head")


def _textured_frames(shift, size=64):
    rng = np.random.default_rng(2)
    obj = ndimage.gaussian_filter(rng.random((12, 12)), 1.0)
    obj = 0.4 + 0.6 * (obj - obj.min()) / np.ptp(obj)
    frames = []
    for dy, dx in [(0, 0), shift]:
        f = np.full((size, size), 0.1)
        f[20 + dy : 32 + dy, 20 + dx : 32 + dx] = obj
        frames.append(f)
    return frames


@pytest.mark.parametrize("shift", [(0, 0), (5, -7), (-20, 25)])
def test_geometric_finds_translation(shift):
    frames = _textured_frames(shift)
    mask = box(64, 64, 20, 20, 32, 32)
    target = box(64, 64, 20 + shift[0], 20 + shift[1], 32 + shift[0], 32 + shift[1])
    prop = GeometricPropagator(frames, search_radius=32, sigma=0.0)
    heat = prop.propagate([(0, mask)], 1)
    assert np.array_equal(heat > 0.5, target.array)


def test_geometric_heatmap_range_and_blur():
    frames = _textured_frames((3, 3))
    mask = box(64, 64, 20, 20, 32, 32)
    heat = GeometricPropagator(frames).propagate([(0, mask), (0, mask)], 1)
    assert heat.min() >= 0.0 and heat.max() <= 1.0
    assert 0.0 < heat[22, 22] < 1.0  # soft edge from the blur
    assert heat[29, 29] > 0.9


def test_geometric_rejects_empty_memory():
    frames = _textured_frames((0, 0))
    prop = GeometricPropagator(frames)
    with pytest.raises(PropagationError):
        prop.propagate([], 1)
    with pytest.raises(PropagationError):
        prop.propagate([(0, box(64, 64, 0, 0, 0, 0))], 1)
