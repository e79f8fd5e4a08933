"""Perspective-normalized speed profiles for the primary subject of a video."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoUsableFrames, TooFewPoints
from .interchange import FrameRecord, VideoManifest
from .maskops import Centroid, area, centroid, largest_mask
from .interchange import decode_rle

NORM_EXPONENT_DEFAULT = 0.5  # apparent linear size ~ sqrt(area)


@dataclass(frozen=True)
class TrackPoint:
    frame_index: int
    centroid: Centroid
    area: int


@dataclass
class SpeedProfile:
    raw: np.ndarray  # pixels / second, one per consecutive tracked pair
    normalized: np.ndarray
    a_ref: float  # mean of tracked mask areas
    terciles: tuple[float, float, float]  # commencement, midpoint, conclusion
    step_frame_indices: np.ndarray  # kept-frame index at the start of each step
    t_seconds: np.ndarray  # time of each step start
    norm_exponent: float = NORM_EXPONENT_DEFAULT


def track_primary_centroids(frames: Sequence[FrameRecord]
                            ) -> tuple[list[TrackPoint], list[int]]:
    """Largest-mask centroid and area per frame; maskless frames become gaps."""
    track: list[TrackPoint] = []
    gaps: list[int] = []
    for fr in frames:
        if not any(d.mask is not None for d in fr.detections):
            gaps.append(fr.frame_index)
            continue
        det = fr.detections[largest_mask(fr)]
        grid = decode_rle(det.mask)
        a = area(grid)
        if a == 0:
            gaps.append(fr.frame_index)
            continue
        track.append(TrackPoint(fr.frame_index, centroid(grid), a))
    if not track:
        raise NoUsableFrames("no frame has a nonempty mask")
    return track, gaps


def tercile_means(values: np.ndarray) -> tuple[float, float, float]:
    """Means over three contiguous windows; remainder goes to the last."""
    n = len(values)
    base = n // 3
    if base == 0:
        m = float(np.mean(values))
        return m, m, m
    first = values[:base]
    second = values[base:2 * base]
    third = values[2 * base:]
    return float(np.mean(first)), float(np.mean(second)), float(np.mean(third))


def compute_speeds(track: Sequence[TrackPoint], fps: float, frame_stride: int,
                   norm_exponent: float = NORM_EXPONENT_DEFAULT) -> SpeedProfile:
    """Centroid displacement over wall-clock time, area-normalized.

    Consecutive tracked points at kept indices t and t+delta span
    delta * frame_stride / fps seconds; gaps extend delta rather than
    interpolating.  normalized = raw * (a_ref / area_t) ** norm_exponent.
    """
    if len(track) < 2:
        raise TooFewPoints(f"need >= 2 tracked points, got {len(track)}")
    areas = np.array([p.area for p in track], dtype=float)
    a_ref = float(areas.mean())
    raw = []
    normalized = []
    step_idx = []
    t_seconds = []
    for p0, p1 in zip(track[:-1], track[1:]):
        delta = p1.frame_index - p0.frame_index
        dt = delta * frame_stride / fps
        disp = math.hypot(p1.centroid.x - p0.centroid.x, p1.centroid.y - p0.centroid.y)
        v = disp / dt
        raw.append(v)
        normalized.append(v * (a_ref / p0.area) ** norm_exponent)
        step_idx.append(p0.frame_index)
        t_seconds.append(p0.frame_index * frame_stride / fps)
    normalized = np.array(normalized)
    return SpeedProfile(
        raw=np.array(raw), normalized=normalized, a_ref=a_ref,
        terciles=tercile_means(normalized),
        step_frame_indices=np.array(step_idx, dtype=int),
        t_seconds=np.array(t_seconds), norm_exponent=norm_exponent)


def analyze_speed(manifest: VideoManifest, frames: Sequence[FrameRecord],
                  norm_exponent: float = NORM_EXPONENT_DEFAULT) -> SpeedProfile:
    track, _ = track_primary_centroids(frames)
    return compute_speeds(track, manifest.fps, manifest.frame_stride, norm_exponent)
