"""Run-length encoded binary masks and the geometry built on them.

Masks are stored column-major (Fortran order) as alternating
background/foreground run lengths, always starting with a background run.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np


class MaskError(ValueError):
    """Malformed mask, string, or mismatched canvas."""


@dataclass(frozen=True)
class BinaryMask:
    width: int
    height: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise MaskError(f"canvas must be positive, got {self.width}x{self.height}")
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if not counts:
            raise MaskError("empty counts")
        if any(c < 0 for c in counts):
            raise MaskError("negative run length")
        if any(c == 0 for c in counts[1:]):
            raise MaskError("zero-length interior run")
        if sum(counts) != self.width * self.height:
            raise MaskError(
                f"counts sum to {sum(counts)}, expected {self.width * self.height}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @cached_property
    def array(self) -> np.ndarray:
        """Decoded (height, width) boolean grid. Read-only."""
        grid = rle_decode(self)
        grid.flags.writeable = False
        return grid

    @cached_property
    def area(self) -> int:
        return int(sum(self.counts[1::2]))

    @classmethod
    def from_array(cls, bitmap) -> "BinaryMask":
        return rle_encode(bitmap)

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(width, height, (width * height,))

    def __repr__(self):
        return f"BinaryMask({self.width}x{self.height}, area={self.area})"


def rle_encode(bitmap) -> BinaryMask:
    grid = np.asarray(bitmap, dtype=bool)
    if grid.ndim != 2 or grid.size == 0:
        raise MaskError(f"expected a non-empty 2-D grid, got shape {grid.shape}")
    height, width = grid.shape
    flat = grid.ravel(order="F")
    # Run boundaries, with a virtual background pixel in front.
    padded = np.concatenate(([False], flat, [not flat[-1]]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    counts = np.diff(np.concatenate(([0], edges)))
    return BinaryMask(width, height, tuple(counts.tolist()))


def rle_decode(mask: BinaryMask) -> np.ndarray:
    counts = np.asarray(mask.counts, dtype=np.int64)
    if counts.sum() != mask.width * mask.height:
        raise MaskError("counts do not cover the canvas")
    values = np.zeros(len(counts), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, counts)
    return flat.reshape((mask.height, mask.width), order="F")


def compressed_rle_encode(mask: BinaryMask) -> str:
    """Serialize counts to the printable LEB128-like text used by challenge files.

    Counts from index 2 on are stored as the difference to the count two
    positions earlier.
    """
    counts = mask.counts
    chars = []
    for i, value in enumerate(counts):
        x = value - counts[i - 2] if i >= 2 else value
        more = True
        while more:
            c = x & 0x1F
            x >>= 5
            more = (x != -1) if (c & 0x10) else (x != 0)
            if more:
                c |= 0x20
            chars.append(chr(c + 48))
    return "".join(chars)


def compressed_rle_decode(s: str, height: int, width: int) -> BinaryMask:
    counts: list[int] = []
    p = 0
    n = len(s)
    while p < n:
        x = 0
        k = 0
        more = True
        while more:
            if p >= n:
                raise MaskError("truncated compressed RLE string")
            o = ord(s[p])
            if o < 48 or o > 111:
                raise MaskError(f"invalid character {s[p]!r} at position {p}")
            c = o - 48
            x |= (c & 0x1F) << (5 * k)
            more = bool(c & 0x20)
            p += 1
            k += 1
            if not more and (c & 0x10):
                x |= -1 << (5 * k)
        if len(counts) >= 2:
            x += counts[-2]
        counts.append(x)
    return BinaryMask(width, height, tuple(counts))


def _check_same_canvas(a: BinaryMask, b: BinaryMask):
    if a.shape != b.shape:
        raise MaskError(f"canvas mismatch: {a.width}x{a.height} vs {b.width}x{b.height}")


def mask_area(m: BinaryMask) -> int:
    return m.area


def mask_center(m: BinaryMask) -> tuple[float, float]:
    """Mean (x, y) of the foreground pixels, x being the column."""
    ys, xs = np.nonzero(m.array)
    if len(xs) == 0:
        raise MaskError("center of an empty mask is undefined")
    return float(xs.mean()), float(ys.mean())


def mask_iou(a: BinaryMask, b: BinaryMask) -> float:
    _check_same_canvas(a, b)
    if a.area == 0 or b.area == 0:
        return 0.0
    inter = np.count_nonzero(a.array & b.array)
    if inter == 0:
        return 0.0
    return inter / (a.area + b.area - inter)


def iou_matrix(rows: Sequence[BinaryMask], cols: Sequence[BinaryMask]) -> np.ndarray:
    out = np.zeros((len(rows), len(cols)))
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            out[i, j] = mask_iou(a, b)
    return out


@dataclass(frozen=True)
class FrameMaskSet:
    frame_index: int
    masks: tuple[tuple[BinaryMask, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "masks", tuple((m, float(p)) for m, p in self.masks))
        shapes = {m.shape for m, _ in self.masks}
        if len(shapes) > 1:
            raise MaskError(f"masks in frame {self.frame_index} do not share a canvas")


def resolve_overlaps(fs: FrameMaskSet) -> FrameMaskSet:
    """Give each contested pixel to the highest-priority mask containing it.

    Equal priorities go to the lower list index. Masks that lose all their
    pixels are kept as empty masks.
    """
    if len(fs.masks) < 2:
        return fs
    # Stable sort: equal priorities keep list order.
    order = sorted(range(len(fs.masks)), key=lambda i: -fs.masks[i][1])
    height, width = fs.masks[0][0].shape
    taken = np.zeros((height, width), dtype=bool)
    resolved: list[BinaryMask | None] = [None] * len(fs.masks)
    for i in order:
        m = fs.masks[i][0]
        grid = m.array
        if np.any(grid & taken):
            resolved[i] = rle_encode(grid & ~taken)
        else:
            resolved[i] = m
        taken |= grid
    return FrameMaskSet(
        fs.frame_index, tuple((r, p) for r, (_, p) in zip(resolved, fs.masks))
    )
