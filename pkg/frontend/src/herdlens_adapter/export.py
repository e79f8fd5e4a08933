from __future__ import annotations

import json
from pathlib import Path

from .config import AdapterConfig
from .errors import DecodeError
from .interchange_out import (detection_obj, write_frames, write_manifest)
from .models import PerceptionBackend
from .video import kept_frames, read_ppm, write_ppm


def export_video(video_path: Path, manifest_fields: dict,
                 config: AdapterConfig,
                 backend: PerceptionBackend) -> Path:
    """Run the perception stack over kept frames, write interchange files.

    manifest_fields needs video_id, fps, activity; view/social optional.
    Returns the directory holding manifest.json and frames.jsonl.
    """
    kept = kept_frames(Path(video_path), config.frame_stride)
    first = read_ppm(kept[0][1])
    height, width = first.shape[:2]

    records: list[tuple[int, list[dict]]] = []
    for idx, path in kept:
        image = read_ppm(path)
        if image.shape[:2] != (height, width):
            raise DecodeError(
                f"{path}: frame size {image.shape[:2]} differs from "
                f"{(height, width)}")
        dets = []
        for bbox, score in backend.detect(image, config.prompt):
            if score < config.score_threshold:
                continue
            mask = backend.segment(image, bbox)
            pose = backend.estimate_pose(image, bbox)
            dets.append(detection_obj(bbox, score, keypoints=pose, mask=mask))
        records.append((idx, dets))

    video_id = str(manifest_fields["video_id"])
    out = config.out_dir / video_id
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(
        out / "manifest.json", video_id=video_id,
        fps=float(manifest_fields["fps"]),
        activity=str(manifest_fields["activity"]),
        width=width, height=height, frame_stride=config.frame_stride,
        view=manifest_fields.get("view"),
        social=manifest_fields.get("social"))
    write_frames(out / "frames.jsonl", video_id, records)
    meta = {"prompt": config.prompt,
            "score_threshold": config.score_threshold,
            "device": config.device}
    (out / "adapter_meta.json").write_text(
        json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8",
        newline="\n")
    return out


def export_imagery(video_path: Path, out_dir: Path, stride: int) -> Path:
    """Copy kept frames as PPM plus an index mapping frame_index to path."""
    out = Path(out_dir)
    img_dir = out / "imagery"
    img_dir.mkdir(parents=True, exist_ok=True)
    index: dict[str, str] = {}
    for idx, path in kept_frames(Path(video_path), stride):
        rel = f"imagery/frame_{idx:06d}.ppm"
        write_ppm(out / rel, read_ppm(path))
        index[str(idx)] = rel
    ipath = out / "imagery_index.json"
    ipath.write_text(json.dumps(index, sort_keys=True) + "\n",
                     encoding="utf-8", newline="\n")
    return ipath
