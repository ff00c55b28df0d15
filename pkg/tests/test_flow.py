import numpy as np
import pytest
from scipy import ndimage

from conftest import box
from mentos.flow import FlowField, estimate_flow, to_gray, warp_mask
from mentos.mask import MaskError, rle_encode


def textured(size=80, seed=0):
    rng = np.random.default_rng(seed)
    img = ndimage.gaussian_filter(rng.random((size, size)), 1.5)
    return (img - img.min()) / (img.max() - img.min())


def shifted_pair(dx, dy, seed=0):
    img = textured(seed=seed)
    moved = np.roll(np.roll(img, dy, axis=0), dx, axis=1)
    return img[8:72, 8:72], moved[8:72, 8:72]


INTERIOR = (slice(12, 52), slice(12, 52))


def test_identical_frames_give_zero_flow():
    a = textured()[:64, :64]
    f = estimate_flow(a, a)
    assert np.all(np.hypot(f.dx, f.dy) <= 0.5)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_recovers_horizontal_shift(seed):
    a, b = shifted_pair(3, 0, seed)
    f = estimate_flow(a, b)
    assert 2.5 <= f.dx[INTERIOR].mean() <= 3.5
    assert abs(f.dy[INTERIOR].mean()) <= 0.5


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_recovers_diagonal_shift(seed):
    a, b = shifted_pair(-2, 4, seed)
    f = estimate_flow(a, b)
    assert abs(f.dx[INTERIOR].mean() + 2) <= 0.5
    assert abs(f.dy[INTERIOR].mean() - 4) <= 0.5


def test_flow_deterministic():
    a, b = shifted_pair(1, 2)
    f1, f2 = estimate_flow(a, b), estimate_flow(a, b)
    assert np.array_equal(f1.dx, f2.dx) and np.array_equal(f1.dy, f2.dy)


def test_flow_argument_checks():
    a = np.zeros((16, 16))
    with pytest.raises(ValueError):
        estimate_flow(a, np.zeros((16, 17)))
    with pytest.raises(ValueError):
        estimate_flow(a, a, window=4)
    with pytest.raises(ValueError):
        estimate_flow(a, a, levels=0)


def test_rgb_to_gray_weights():
    rgb = np.zeros((1, 3, 3), np.uint8)
    rgb[0, 0, 0] = rgb[0, 1, 1] = rgb[0, 2, 2] = 255
    assert np.allclose(to_gray(rgb)[0], [0.299, 0.587, 0.114])


def test_warp_zero_flow_is_identity():
    m = box(20, 20, 3, 4, 9, 12)
    assert warp_mask(m, FlowField.zeros(20, 20)) == m


def test_warp_translates_square():
    m = box(20, 20, 5, 5, 10, 10)
    assert warp_mask(m, FlowField.uniform(20, 20, 2, 0)) == box(20, 20, 5, 7, 10, 12)


def test_warp_clips_at_border():
    # Columns 16..19 of a 20-wide canvas; +3 keeps only column 16 -> 19.
    m = box(20, 20, 0, 16, 5, 20)
    out = warp_mask(m, FlowField.uniform(20, 20, 3, 0))
    leaving = sum(1 for x in range(16, 20) if x + 3 >= 20) * 5
    assert out.area == m.area - leaving == 5


def test_warp_shape_mismatch():
    with pytest.raises(MaskError):
        warp_mask(box(10, 10, 0, 0, 2, 2), FlowField.zeros(10, 11))


def test_warp_uniform_integer_flow_exhaustive():
    rng = np.random.default_rng(3)
    for _ in range(30):
        g = rng.random((7, 6)) < 0.4
        m = rle_encode(g)
        for dx in range(-7, 8):
            for dy in range(-8, 9):
                expected = np.zeros_like(g)
                for y, x in zip(*np.nonzero(g)):
                    if 0 <= y + dy < 7 and 0 <= x + dx < 6:
                        expected[y + dy, x + dx] = True
                out = warp_mask(m, FlowField.uniform(7, 6, dx, dy))
                assert np.array_equal(out.array, expected)


def test_warp_never_increases_area():
    rng = np.random.default_rng(4)
    for _ in range(50):
        m = rle_encode(rng.random((12, 12)) < 0.5)
        flow = FlowField(rng.normal(0, 2, (12, 12)), rng.normal(0, 2, (12, 12)))
        assert warp_mask(m, flow).area <= m.area
