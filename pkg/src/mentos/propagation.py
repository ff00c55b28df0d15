"""Mask propagators: given reference (frame, mask) pairs, predict a soft mask
for another frame of the same video.

A propagator is any object with a ``propagate`` method matching
:class:`Propagator`. The geometric one here stands in for a memory network;
the external adapter reads heatmaps that a real network produced offline.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np
from scipy import ndimage, signal

from .flow import to_gray
from .mask import BinaryMask

HEAD = "head"
TAIL = "tail"


class PropagationError(RuntimeError):
    pass


class Propagator(Protocol):
    def propagate(
        self,
        memory: Sequence[tuple[int, BinaryMask]],
        query_frame: int,
        *,
        tracklet_id: int,
        side: str,
    ) -> np.ndarray:
        """Return a (H, W) heatmap in [0, 1] for ``query_frame``.

        ``memory`` holds (frame index, mask) references of tracklet
        ``tracklet_id`` taken from its ``side`` ("head" or "tail").
        """
        ...


def _best_shift(template_img, template_mask, query_img, radius):
    """Integer (dy, dx) maximizing masked normalized cross-correlation."""
    ys, xs = np.nonzero(template_mask)
    y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
    m = template_mask[y0:y1, x0:x1].astype(np.float64)
    t = template_img[y0:y1, x0:x1] * m
    npx = m.sum()
    t = (t - t.sum() / npx) * m
    t_norm = np.sqrt((t * t).sum())

    h, w = query_img.shape
    region = np.zeros((y1 - y0 + 2 * radius, x1 - x0 + 2 * radius))
    ry0, rx0 = y0 - radius, x0 - radius
    sy0, sy1 = max(ry0, 0), min(y1 + radius, h)
    sx0, sx1 = max(rx0, 0), min(x1 + radius, w)
    region[sy0 - ry0 : sy1 - ry0, sx0 - rx0 : sx1 - rx0] = query_img[sy0:sy1, sx0:sx1]

    num = signal.correlate(region, t, mode="valid", method="fft")
    s1 = signal.correlate(region, m, mode="valid", method="fft")
    s2 = signal.correlate(region * region, m, mode="valid", method="fft")
    var = np.maximum(s2 - s1 * s1 / npx, 0.0)
    denom = t_norm * np.sqrt(var)
    with np.errstate(invalid="ignore", divide="ignore"):
        ncc = np.where(denom > 1e-9, num / denom, -1.0)
    ncc = np.round(ncc, 9)  # FFT noise must not decide ties

    oy, ox = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    # Highest score, then the smallest displacement.
    order = np.lexsort((ox.ravel(), oy.ravel(), (oy * oy + ox * ox).ravel(), -ncc.ravel()))
    k = order[0]
    return int(oy.ravel()[k]), int(ox.ravel()[k])


def _shift(grid: np.ndarray, dy: int, dx: int) -> np.ndarray:
    out = np.zeros_like(grid)
    h, w = grid.shape
    ys, xs = slice(max(dy, 0), min(h + dy, h)), slice(max(dx, 0), min(w + dx, w))
    src_y, src_x = slice(max(-dy, 0), min(h - dy, h)), slice(max(-dx, 0), min(w - dx, w))
    out[ys, xs] = grid[src_y, src_x]
    return out


class GeometricPropagator:
    """Translate each reference mask to where its texture best correlates in
    the query frame, average the results, and blur into a soft heatmap."""

    def __init__(self, frames: Sequence[np.ndarray], search_radius: int = 32, sigma: float = 2.0):
        self.frames = [to_gray(f) for f in frames]
        self.search_radius = search_radius
        self.sigma = sigma

    def propagate(self, memory, query_frame, *, tracklet_id=None, side=None):
        if not memory:
            raise PropagationError("empty memory")
        query = self.frames[query_frame]
        acc = np.zeros(query.shape)
        for frame, mask in memory:
            grid = mask.array
            if not grid.any():
                raise PropagationError(f"empty reference mask in frame {frame}")
            dy, dx = _best_shift(self.frames[frame], grid, query, self.search_radius)
            acc += _shift(grid.astype(np.float64), dy, dx)
        acc /= len(memory)
        heat = ndimage.gaussian_filter(acc, self.sigma, mode="constant")
        return np.clip(heat, 0.0, 1.0)


MAGIC = b"HMAP"


def write_heatmap(path, heatmap: np.ndarray):
    """Write a raster as 'HMAP', u32 width, u32 height, then float32 LE row-major."""
    h, w = heatmap.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<II", w, h))
        fh.write(np.asarray(heatmap, dtype="<f4").tobytes(order="C"))


def read_heatmap(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise PropagationError(f"{path}: not a heatmap file")
    w, h = struct.unpack("<II", data[4:12])
    if len(data) != 12 + 4 * w * h:
        raise PropagationError(f"{path}: expected {w}x{h} floats")
    values = np.frombuffer(data, dtype="<f4", offset=12).reshape(h, w).astype(np.float64)
    return np.clip(np.nan_to_num(values, nan=0.0), 0.0, 1.0)


def heatmap_path(root, video: str, tracklet_id: int, side: str, query_frame: int) -> Path:
    return Path(root) / video / f"{tracklet_id}_{side}_{query_frame}.hmap"


class ExternalHeatmapAdapter:
    """Serve heatmaps precomputed by an external network.

    Files live at ``root/video/{tracklet_id}_{side}_{query_frame}.hmap``.
    Values are clamped to [0, 1] on load.
    """

    def __init__(self, root, video: str, shape: tuple[int, int] | None = None):
        self.root = Path(root)
        self.video = video
        self.shape = shape

    def propagate(self, memory, query_frame, *, tracklet_id, side):
        path = heatmap_path(self.root, self.video, tracklet_id, side, query_frame)
        if not path.exists():
            raise PropagationError(f"missing heatmap {path}")
        heat = read_heatmap(path)
        if self.shape is not None and heat.shape != tuple(self.shape):
            raise PropagationError(f"{path}: shape {heat.shape}, expected {self.shape}")
        return heat
