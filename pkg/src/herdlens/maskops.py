"""Geometry over binary masks: centroids, areas, set ops, resizing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyMask, NoMasks
from .interchange import FrameRecord, decode_rle


@dataclass(frozen=True)
class Centroid:
    x: float
    y: float


@dataclass(frozen=True)
class PatchWindow:
    """Half-open pixel window [x0, x1) x [y0, y1), already clipped to frame."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def empty(self) -> bool:
        return self.x1 <= self.x0 or self.y1 <= self.y0

    @property
    def width(self) -> int:
        return max(0, self.x1 - self.x0)

    @property
    def height(self) -> int:
        return max(0, self.y1 - self.y0)

    @staticmethod
    def clipped(x0: int, y0: int, x1: int, y1: int, frame_w: int, frame_h: int) -> "PatchWindow":
        return PatchWindow(
            x0=max(0, min(x0, frame_w)),
            y0=max(0, min(y0, frame_h)),
            x1=max(0, min(x1, frame_w)),
            y1=max(0, min(y1, frame_h)),
        )


def centroid(mask: np.ndarray) -> Centroid:
    """Mean of set-pixel coordinates, pixel centers at integer coordinates."""
    ys, xs = np.nonzero(np.asarray(mask, dtype=bool))
    if xs.size == 0:
        raise EmptyMask("centroid of an empty mask")
    return Centroid(x=float(xs.mean()), y=float(ys.mean()))


def area(mask: np.ndarray) -> int:
    return int(np.count_nonzero(np.asarray(mask, dtype=bool)))


def largest_mask(frame: FrameRecord) -> int:
    """Index of the detection with the largest mask; ties to the lowest index."""
    best_idx = -1
    best_area = -1
    for i, det in enumerate(frame.detections):
        if det.mask is None:
            continue
        a = det.mask.area()
        if a > best_area:
            best_area = a
            best_idx = i
    if best_idx < 0:
        raise NoMasks(f"frame {frame.frame_index} has no masked detection")
    return best_idx


def union_masks(masks: list[np.ndarray]) -> np.ndarray:
    if not masks:
        raise ValueError("union of zero masks is undefined without a shape")
    shape = masks[0].shape
    out = np.zeros(shape, dtype=bool)
    for m in masks:
        if m.shape != shape:
            raise DimensionMismatch(f"mask shape {m.shape} != {shape}")
        out |= m.astype(bool)
    return out


def patch_minus_masks(window: PatchWindow, masks: list[np.ndarray]) -> np.ndarray:
    """Keep-mask over the window: 1 where the pixel lies outside every mask."""
    keep = np.ones((window.height, window.width), dtype=bool)
    if window.empty:
        return keep
    for m in masks:
        sub = np.asarray(m, dtype=bool)[window.y0:window.y1, window.x0:window.x1]
        keep &= ~sub
    return keep


def resize_nearest(mask: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Nearest-neighbor resize sampling at pixel centers."""
    m = np.asarray(mask, dtype=bool)
    src_h, src_w = m.shape
    rows = np.minimum((np.floor((np.arange(out_h) + 0.5) * src_h / out_h)).astype(int), src_h - 1)
    cols = np.minimum((np.floor((np.arange(out_w) + 0.5) * src_w / out_w)).astype(int), src_w - 1)
    return m[np.ix_(rows, cols)]
