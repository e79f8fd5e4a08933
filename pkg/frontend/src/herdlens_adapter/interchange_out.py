"""Writers for the engine's interchange files.

The JSON/JSONL layout is the contract between this adapter and the analysis
engine; these writers are intentionally the only place it is spelled out.
Masks are uncompressed row-major RLE starting with the zero run, with no
interior zero counts.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def rle_counts(grid: np.ndarray) -> list[int]:
    flat = np.asarray(grid, dtype=bool).ravel()
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [flat.size]))
    counts = (ends - starts).tolist()
    if flat[0]:
        counts.insert(0, 0)
    return [int(c) for c in counts]


def mask_obj(grid: np.ndarray) -> dict:
    h, w = grid.shape
    return {"size": [h, w], "counts": rle_counts(grid)}


def detection_obj(bbox, score, keypoints=None, mask=None, track_id=None) -> dict:
    return {
        "track_id": track_id,
        "bbox": [float(v) for v in bbox],
        "score": float(score),
        "keypoints": None if keypoints is None
        else [[float(v) for v in row] for row in keypoints],
        "mask_rle": None if mask is None else mask_obj(mask),
    }


def write_manifest(path: Path, *, video_id: str, fps: float, activity: str,
                   width: int, height: int, frame_stride: int,
                   view=None, social=None) -> None:
    obj = {
        "video_id": video_id,
        "fps": fps,
        "activity": activity,
        "view": view,
        "social": social,
        "frame_stride": frame_stride,
        "width": width,
        "height": height,
    }
    Path(path).write_text(json.dumps(obj) + "\n", encoding="utf-8",
                          newline="\n")


def write_frames(path: Path, video_id: str,
                 frames: list[tuple[int, list[dict]]]) -> None:
    lines = [
        json.dumps({"video_id": video_id, "frame_index": idx,
                    "detections": dets})
        for idx, dets in frames
    ]
    Path(path).write_text("".join(line + "\n" for line in lines),
                          encoding="utf-8", newline="\n")
