"""Dense optical flow by coarse-to-fine block matching, and forward mask warping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .mask import BinaryMask, MaskError, rle_encode


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement from the previous frame to the next one."""

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        if self.dx.shape != self.dy.shape or self.dx.ndim != 2:
            raise ValueError("dx and dy must be 2-D arrays of equal shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.dx.shape

    @classmethod
    def zeros(cls, height: int, width: int) -> "FlowField":
        return cls(np.zeros((height, width)), np.zeros((height, width)))

    @classmethod
    def uniform(cls, height: int, width: int, dx: float, dy: float) -> "FlowField":
        return cls(np.full((height, width), float(dx)), np.full((height, width), float(dy)))


def to_gray(image) -> np.ndarray:
    """Intensities in [0, 1]. Accepts 2-D gray or (H, W, 3) RGB, uint8 or float."""
    img = np.asarray(image)
    scale = 255.0 if img.dtype == np.uint8 else 1.0
    img = img.astype(np.float64) / scale
    if img.ndim == 3:
        img = img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    if img.ndim != 2:
        raise ValueError(f"expected a gray or RGB image, got shape {img.shape}")
    return img


def _pyramid(img: np.ndarray, levels: int) -> list[np.ndarray]:
    out = [img]
    for _ in range(levels - 1):
        smooth = ndimage.gaussian_filter(out[-1], sigma=1.0, mode="nearest")
        out.append(smooth[::2, ::2])
    return out


def _candidate_offsets(radius: int) -> list[tuple[int, int]]:
    offsets = [(dy, dx) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)]
    # Smallest displacement wins ties, so textureless regions stay still.
    offsets.sort(key=lambda d: (abs(d[0]) + abs(d[1]), d[0] * d[0] + d[1] * d[1], d))
    return offsets


def _match_level(prev, nxt, init_dx, init_dy, window, radius):
    h, w = prev.shape
    # Edge padding reproduces border clamping for any reachable displacement.
    margin = int(max(np.abs(init_dx).max(), np.abs(init_dy).max())) + radius
    padded = np.pad(nxt, margin, mode="edge").astype(np.float32).ravel()
    pw = w + 2 * margin
    ys, xs = np.mgrid[0:h, 0:w]
    base = (ys + margin + init_dy) * pw + (xs + margin + init_dx)
    prev32 = prev.astype(np.float32)
    best_cost = np.full((h, w), np.inf, dtype=np.float32)
    best_dx = init_dx.copy()
    best_dy = init_dy.copy()
    for oy, ox in _candidate_offsets(radius):
        sampled = padded[base + (oy * pw + ox)]
        sad = ndimage.uniform_filter(np.abs(sampled - prev32), size=window, mode="nearest")
        # Only strictly better candidates replace: keeps the smaller offset on ties.
        better = sad < best_cost - 1e-6
        best_cost[better] = sad[better]
        best_dx[better] = init_dx[better] + ox
        best_dy[better] = init_dy[better] + oy
    return best_dx, best_dy


def estimate_flow(prev, nxt, levels: int = 3, window: int = 7) -> FlowField:
    """Block-matching flow from ``prev`` to ``nxt``.

    Each pyramid level searches integer offsets within +-window//2 of the
    upsampled coarser estimate, scoring a window x window sum of absolute
    differences. The finest integer field is smoothed with a 3x3 box filter.
    """
    prev = to_gray(prev)
    nxt = to_gray(nxt)
    if prev.shape != nxt.shape:
        raise ValueError(f"frame shapes differ: {prev.shape} vs {nxt.shape}")
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be odd and >= 3")
    radius = window // 2

    pyr_prev = _pyramid(prev, levels)
    pyr_next = _pyramid(nxt, levels)
    dx = np.zeros(pyr_prev[-1].shape, dtype=np.int64)
    dy = np.zeros_like(dx)
    for level in range(levels - 1, -1, -1):
        p, q = pyr_prev[level], pyr_next[level]
        if dx.shape != p.shape:
            dx = 2 * np.repeat(np.repeat(dx, 2, axis=0), 2, axis=1)[: p.shape[0], : p.shape[1]]
            dy = 2 * np.repeat(np.repeat(dy, 2, axis=0), 2, axis=1)[: p.shape[0], : p.shape[1]]
        dx, dy = _match_level(p, q, dx, dy, window, radius)
        if level > 0:
            # Suppress isolated mismatches before they are doubled upwards.
            dx = ndimage.median_filter(dx, size=3, mode="nearest")
            dy = ndimage.median_filter(dy, size=3, mode="nearest")

    fx = ndimage.uniform_filter(dx.astype(np.float64), size=3, mode="nearest")
    fy = ndimage.uniform_filter(dy.astype(np.float64), size=3, mode="nearest")
    return FlowField(fx, fy)


def warp_mask(m: BinaryMask, flow: FlowField) -> BinaryMask:
    """Forward-warp every foreground pixel to round(position + flow)."""
    if flow.shape != m.shape:
        raise MaskError(f"flow shape {flow.shape} does not match mask {m.shape}")
    ys, xs = np.nonzero(m.array)
    ty = np.floor(ys + flow.dy[ys, xs] + 0.5).astype(np.int64)
    tx = np.floor(xs + flow.dx[ys, xs] + 0.5).astype(np.int64)
    keep = (ty >= 0) & (ty < m.height) & (tx >= 0) & (tx < m.width)
    out = np.zeros(m.shape, dtype=bool)
    out[ty[keep], tx[keep]] = True
    return rle_encode(out)
