"""Grazing analysis: nose-anchored ground patch, excess-green scoring."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (DimensionMismatch, LowConfidenceNose, MissingImagery,
                     MissingSocialLabel)
from .interchange import FrameRecord, PoseSet, VideoManifest, decode_rle
from .maskops import PatchWindow, patch_minus_masks

NOSE_INDEX_DEFAULT = 2  # 17-point animal scheme: nose follows the two eyes
NOSE_MIN_CONF = 0.3
PATCH_SIDE_FACTOR = 0.4  # window side as a fraction of the bbox diagonal
BOOTSTRAP_RESAMPLES = 1000


@dataclass(frozen=True)
class GrazeFrameSample:
    frame_index: int
    window: PatchWindow
    keep_pixels: int
    green_score: float  # mean ExG over keep pixels; NaN when occluded
    occluded: bool = False


@dataclass
class VideoGrazeResult:
    video_id: str
    social: str
    samples: list[GrazeFrameSample]
    scores: np.ndarray  # non-occluded frames only
    deltas: np.ndarray  # score_t - score_{t-1}
    activity_index: float  # mean score
    skipped_frames: list[int] = field(default_factory=list)


@dataclass
class GroupGrazeSummary:
    mean: float
    ci_low: float
    ci_high: float
    n_videos: int


@dataclass
class GrazeReport:
    videos: list[VideoGrazeResult]
    groups: dict[str, GroupGrazeSummary]
    score_kind: str = "exg"
    patch_side_factor: float = PATCH_SIDE_FACTOR


def read_ppm(path: str | Path) -> np.ndarray:
    """Read an 8-bit P6 PPM into an (h, w, 3) float array in [0, 1]."""
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"{path}: not a P6 PPM")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PPM supported")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=h * w * 3, offset=pos)
    return pixels.reshape(h, w, 3).astype(np.float64) / 255.0


def write_ppm(path: str | Path, image: np.ndarray) -> None:
    img = np.asarray(image)
    if img.dtype != np.uint8:
        img = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def grazing_patch(pose: PoseSet, bbox: tuple[float, float, float, float],
                  frame_w: int, frame_h: int,
                  nose_index: int = NOSE_INDEX_DEFAULT,
                  min_conf: float = NOSE_MIN_CONF,
                  side_factor: float = PATCH_SIDE_FACTOR) -> PatchWindow:
    """Square window centered at the nose keypoint, clipped to the frame."""
    nx, ny, conf = pose.points[nose_index]
    if conf < min_conf:
        raise LowConfidenceNose(f"nose confidence {conf:.3f} < {min_conf}")
    _, _, w, h = bbox
    side = round(side_factor * math.hypot(w, h))
    half = side / 2.0
    return PatchWindow.clipped(
        int(round(nx - half)), int(round(ny - half)),
        int(round(nx - half)) + side, int(round(ny - half)) + side,
        frame_w, frame_h)


def excess_green(image: np.ndarray) -> np.ndarray:
    r, g, b = image[..., 0], image[..., 1], image[..., 2]
    return 2.0 * g - r - b


def green_score(image: np.ndarray, window: PatchWindow,
                masks: list[np.ndarray], frame_index: int = 0,
                use_exg: bool = True) -> GrazeFrameSample:
    """Mean green signal over window pixels outside every mask."""
    h, w = image.shape[:2]
    for m in masks:
        if m.shape != (h, w):
            raise DimensionMismatch(f"mask {m.shape} vs image {(h, w)}")
    keep = patch_minus_masks(window, masks)
    count = int(keep.sum()) if not window.empty else 0
    if count == 0:
        return GrazeFrameSample(frame_index, window, 0, float("nan"), occluded=True)
    signal = excess_green(image) if use_exg else image[..., 1]
    patch = signal[window.y0:window.y1, window.x0:window.x1]
    return GrazeFrameSample(frame_index, window, count, float(patch[keep].mean()))


def load_imagery_index(index_path: str | Path) -> dict[int, Path]:
    path = Path(index_path)
    if not path.is_file():
        raise MissingImagery(f"imagery index not found: {path}")
    obj = json.loads(path.read_text(encoding="utf-8"))
    return {int(k): path.parent / v for k, v in obj.items()}


def analyze_video(manifest: VideoManifest, frames: Sequence[FrameRecord],
                  imagery: dict[int, Path],
                  nose_index: int = NOSE_INDEX_DEFAULT,
                  side_factor: float = PATCH_SIDE_FACTOR,
                  use_exg: bool = True) -> VideoGrazeResult:
    if manifest.social is None:
        raise MissingSocialLabel(f"video {manifest.video_id} lacks a social label")
    samples: list[GrazeFrameSample] = []
    skipped: list[int] = []
    for fr in frames:
        if fr.frame_index not in imagery:
            raise MissingImagery(
                f"frame {fr.frame_index} of {manifest.video_id} has no image")
        det = next((d for d in fr.detections if d.keypoints is not None), None)
        if det is None:
            skipped.append(fr.frame_index)
            continue
        try:
            window = grazing_patch(det.keypoints, det.bbox,
                                   manifest.width, manifest.height,
                                   nose_index=nose_index, side_factor=side_factor)
        except LowConfidenceNose:
            skipped.append(fr.frame_index)
            continue
        image = read_ppm(imagery[fr.frame_index])
        masks = [decode_rle(d.mask) for d in fr.detections if d.mask is not None]
        samples.append(green_score(image, window, masks,
                                   frame_index=fr.frame_index, use_exg=use_exg))
    scores = np.array([s.green_score for s in samples if not s.occluded])
    deltas = np.diff(scores) if scores.size > 1 else np.array([])
    activity = float(scores.mean()) if scores.size else float("nan")
    return VideoGrazeResult(
        video_id=manifest.video_id, social=manifest.social, samples=samples,
        scores=scores, deltas=deltas, activity_index=activity,
        skipped_frames=skipped)


def bootstrap_ci(values: np.ndarray, seed: int, n_resamples: int = BOOTSTRAP_RESAMPLES,
                 level: float = 0.95) -> tuple[float, float]:
    """Percentile bootstrap CI over the given per-video indices."""
    rng = np.random.default_rng(seed)
    means = np.empty(n_resamples)
    for i in range(n_resamples):
        means[i] = rng.choice(values, size=values.size, replace=True).mean()
    alpha = (1.0 - level) / 2.0
    return (float(np.quantile(means, alpha)), float(np.quantile(means, 1.0 - alpha)))


def analyze_grazing(videos: Sequence[tuple[VideoManifest, Sequence[FrameRecord], dict[int, Path]]],
                    seed: int = 0,
                    nose_index: int = NOSE_INDEX_DEFAULT,
                    side_factor: float = PATCH_SIDE_FACTOR,
                    use_exg: bool = True) -> GrazeReport:
    """Per-video grazing index plus single/herd group summaries."""
    results = [
        analyze_video(m, fr, imagery, nose_index=nose_index,
                      side_factor=side_factor, use_exg=use_exg)
        for m, fr, imagery in sorted(videos, key=lambda v: v[0].video_id)
    ]
    groups: dict[str, GroupGrazeSummary] = {}
    for social in ("single", "herd"):
        idx = np.array([r.activity_index for r in results if r.social == social])
        if idx.size == 0:
            continue
        lo, hi = bootstrap_ci(idx, seed=seed)
        groups[social] = GroupGrazeSummary(
            mean=float(idx.mean()), ci_low=lo, ci_high=hi, n_videos=int(idx.size))
    return GrazeReport(videos=results, groups=groups,
                       score_kind="exg" if use_exg else "green_channel",
                       patch_side_factor=side_factor)
