"""File format through which perception outputs enter the engine.

A video is a pair of files: a JSON manifest and a JSON-lines frames file
(one frame object per line).  Masks travel as uncompressed run-length
encodings in row-major scan order, starting with the run of zeros.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import RleOverflow, SumMismatch

ACTIVITIES = ("grazing", "running", "sitting")
VIEWS = ("front", "side")
SOCIALS = ("single", "herd")

N_KEYPOINTS = 17


@dataclass(frozen=True)
class VideoManifest:
    video_id: str
    fps: float
    activity: str
    width: int
    height: int
    frame_stride: int = 10
    view: Optional[str] = None
    social: Optional[str] = None

    def validate(self) -> list[str]:
        problems = []
        if not self.video_id:
            problems.append("video_id is empty")
        if not (self.fps > 0):
            problems.append("fps must be > 0")
        if self.activity not in ACTIVITIES:
            problems.append(f"activity {self.activity!r} not in {ACTIVITIES}")
        if self.frame_stride < 1:
            problems.append("frame_stride must be >= 1")
        if self.width < 1 or self.height < 1:
            problems.append("width and height must be positive")
        if self.view is not None and self.view not in VIEWS:
            problems.append(f"view {self.view!r} not in {VIEWS}")
        if self.social is not None and self.social not in SOCIALS:
            problems.append(f"social {self.social!r} not in {SOCIALS}")
        return problems


@dataclass(frozen=True)
class RleMask:
    size: tuple[int, int]  # (h, w)
    counts: tuple[int, ...]

    def area(self) -> int:
        return int(sum(self.counts[1::2]))


@dataclass(frozen=True)
class PoseSet:
    points: np.ndarray  # (17, 3) float: x, y, confidence

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (N_KEYPOINTS, 3):
            raise ValueError(f"pose must have shape (17, 3), got {pts.shape}")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class Detection:
    bbox: tuple[float, float, float, float]  # x, y, w, h
    score: float
    track_id: Optional[int] = None
    keypoints: Optional[PoseSet] = None
    mask: Optional[RleMask] = None


@dataclass(frozen=True)
class FrameRecord:
    video_id: str
    frame_index: int
    detections: tuple[Detection, ...] = ()


@dataclass(frozen=True)
class ValidationIssue:
    kind: str  # ParseError | InvariantViolation | ManifestMismatch
    where: str  # "line 3", "frame 7", ...
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {self.where}: {self.message}"


def decode_rle(mask: RleMask) -> np.ndarray:
    """Expand an RLE mask into an (h, w) boolean grid."""
    h, w = mask.size
    total = h * w
    counts = np.asarray(mask.counts, dtype=np.int64)
    if counts.size and counts.min() < 0:
        raise SumMismatch("negative run length")
    if counts.size and int(counts.cumsum().max()) > total:
        raise RleOverflow("run extends past the end of the grid")
    if int(counts.sum()) != total:
        raise SumMismatch(f"counts sum to {int(counts.sum())}, expected {total}")
    values = np.arange(counts.size, dtype=np.int64) % 2  # 0-run first
    flat = np.repeat(values.astype(bool), counts)
    return flat.reshape(h, w)


def encode_rle(grid: np.ndarray) -> RleMask:
    """Canonical RLE of a boolean grid: zero counts only in leading position."""
    g = np.asarray(grid).astype(bool)
    if g.ndim != 2 or g.size == 0:
        raise ValueError("grid must be a nonempty 2-D array")
    flat = g.ravel()
    # run boundaries
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [flat.size]))
    runs = ends - starts
    counts = list(runs)
    if flat[0]:  # canonical encodings start with the zero-run
        counts.insert(0, 0)
    return RleMask(size=g.shape, counts=tuple(int(c) for c in counts))


def validate_detection(det: Detection, manifest: VideoManifest) -> list[str]:
    problems = []
    x, y, w, h = det.bbox
    if not all(math.isfinite(v) for v in det.bbox):
        problems.append("bbox has non-finite values")
    else:
        if x < 0 or y < 0:
            problems.append("bbox origin negative")
        if w <= 0 or h <= 0:
            problems.append("bbox width/height must be positive")
        if x + w > manifest.width + 1e-9:
            problems.append("bbox exceeds frame width")
        if y + h > manifest.height + 1e-9:
            problems.append("bbox exceeds frame height")
    if not (0.0 <= det.score <= 1.0):
        problems.append("score outside [0, 1]")
    if det.track_id is not None and det.track_id < 0:
        problems.append("track_id must be nonnegative")
    if det.keypoints is not None:
        pts = det.keypoints.points
        if not np.all(np.isfinite(pts)):
            problems.append("keypoints contain non-finite values")
        elif pts[:, 2].min() < 0 or pts[:, 2].max() > 1:
            problems.append("keypoint confidence outside [0, 1]")
    if det.mask is not None:
        mh, mw = det.mask.size
        if (mh, mw) != (manifest.height, manifest.width):
            problems.append(
                f"mask size {(mh, mw)} != frame size {(manifest.height, manifest.width)}"
            )
        if sum(det.mask.counts) != mh * mw:
            problems.append("mask counts do not sum to h*w")
        if any(c < 0 for c in det.mask.counts):
            problems.append("mask has negative run length")
        if any(c == 0 for c in det.mask.counts[1:]):
            problems.append("mask RLE not canonical (interior zero count)")
    return problems


# ---------------------------------------------------------------------------
# JSON (de)serialization


def manifest_to_obj(m: VideoManifest) -> dict:
    obj = {
        "video_id": m.video_id,
        "fps": m.fps,
        "activity": m.activity,
        "view": m.view,
        "social": m.social,
        "frame_stride": m.frame_stride,
        "width": m.width,
        "height": m.height,
    }
    return obj


def manifest_from_obj(obj: dict) -> VideoManifest:
    return VideoManifest(
        video_id=str(obj["video_id"]),
        fps=float(obj["fps"]),
        activity=str(obj["activity"]),
        view=obj.get("view"),
        social=obj.get("social"),
        frame_stride=int(obj.get("frame_stride", 10)),
        width=int(obj["width"]),
        height=int(obj["height"]),
    )


def detection_to_obj(det: Detection) -> dict:
    return {
        "track_id": det.track_id,
        "bbox": [float(v) for v in det.bbox],
        "score": float(det.score),
        "keypoints": None
        if det.keypoints is None
        else [[float(v) for v in row] for row in det.keypoints.points],
        "mask_rle": None
        if det.mask is None
        else {"size": list(det.mask.size), "counts": list(det.mask.counts)},
    }


def detection_from_obj(obj: dict) -> Detection:
    kp = obj.get("keypoints")
    mask = obj.get("mask_rle")
    return Detection(
        track_id=obj.get("track_id"),
        bbox=tuple(float(v) for v in obj["bbox"]),
        score=float(obj["score"]),
        keypoints=None if kp is None else PoseSet(np.asarray(kp, dtype=float)),
        mask=None
        if mask is None
        else RleMask(size=tuple(int(v) for v in mask["size"]),
                     counts=tuple(int(c) for c in mask["counts"])),
    )


def frame_to_obj(fr: FrameRecord) -> dict:
    return {
        "video_id": fr.video_id,
        "frame_index": fr.frame_index,
        "detections": [detection_to_obj(d) for d in fr.detections],
    }


def frame_from_obj(obj: dict) -> FrameRecord:
    return FrameRecord(
        video_id=str(obj["video_id"]),
        frame_index=int(obj["frame_index"]),
        detections=tuple(detection_from_obj(d) for d in obj["detections"]),
    )


def write_video(manifest: VideoManifest, frames: Iterable[FrameRecord],
                manifest_path: str | Path, frames_path: str | Path) -> None:
    Path(manifest_path).write_text(
        json.dumps(manifest_to_obj(manifest)) + "\n", encoding="utf-8", newline="\n"
    )
    lines = [json.dumps(frame_to_obj(fr)) for fr in frames]
    Path(frames_path).write_text(
        "".join(line + "\n" for line in lines), encoding="utf-8", newline="\n"
    )


def read_video(manifest_path: str | Path, frames_path: str | Path
               ) -> tuple[Optional[VideoManifest], list[FrameRecord], list[ValidationIssue]]:
    """Parse and validate a manifest/frames pair.

    Returns the manifest (None if unreadable), the frames sorted by
    frame_index, and every violation found.  Invalid lines are reported
    and skipped rather than aborting the read.
    """
    issues: list[ValidationIssue] = []
    manifest: Optional[VideoManifest] = None
    try:
        obj = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
        manifest = manifest_from_obj(obj)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        issues.append(ValidationIssue("ParseError", str(manifest_path), str(exc)))
    if manifest is not None:
        for msg in manifest.validate():
            issues.append(ValidationIssue("InvariantViolation", str(manifest_path), msg))

    frames: list[FrameRecord] = []
    try:
        text = Path(frames_path).read_text(encoding="utf-8")
    except OSError as exc:
        issues.append(ValidationIssue("ParseError", str(frames_path), str(exc)))
        return manifest, frames, issues

    last_index = -1
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            fr = frame_from_obj(json.loads(line))
        except (ValueError, KeyError, TypeError) as exc:
            issues.append(ValidationIssue("ParseError", f"line {lineno}", str(exc)))
            continue
        if fr.frame_index < 0:
            issues.append(ValidationIssue(
                "InvariantViolation", f"line {lineno}", "frame_index negative"))
            continue
        if fr.frame_index <= last_index:
            issues.append(ValidationIssue(
                "InvariantViolation", f"line {lineno}",
                f"frame_index {fr.frame_index} not strictly increasing"))
        last_index = max(last_index, fr.frame_index)
        if manifest is not None:
            if fr.video_id != manifest.video_id:
                issues.append(ValidationIssue(
                    "ManifestMismatch", f"line {lineno}",
                    f"video_id {fr.video_id!r} != manifest {manifest.video_id!r}"))
            for di, det in enumerate(fr.detections):
                for msg in validate_detection(det, manifest):
                    issues.append(ValidationIssue(
                        "InvariantViolation",
                        f"frame {fr.frame_index} detection {di}", msg))
        frames.append(fr)
    frames.sort(key=lambda fr: fr.frame_index)
    return manifest, frames, issues
