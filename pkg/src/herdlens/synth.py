"""Synthetic interchange datasets with exact ground truth.

Every generator is deterministic under its seed and emits files that pass
interchange validation; truth.json carries enough information to score
the analyzers without re-deriving any geometry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import OutOfFrame
from .graze import PATCH_SIDE_FACTOR, write_ppm
from .interchange import (Detection, FrameRecord, PoseSet, RleMask,
                          VideoManifest, encode_rle, write_video)

SCENARIOS = ("motion", "blobs", "grazing", "resting", "gait")


@dataclass
class SynthVideo:
    manifest: VideoManifest
    frames: list[FrameRecord]
    imagery: Optional[dict[int, np.ndarray]] = None  # frame_index -> RGB float image


@dataclass
class SynthResult:
    scenario: str
    videos: list[SynthVideo]
    truth: dict
    points: Optional[np.ndarray] = None  # blobs scenario only
    labels: Optional[np.ndarray] = None


def _ellipse_grid(h: int, w: int, cx: float, cy: float, rx: float, ry: float) -> np.ndarray:
    ys, xs = np.mgrid[0:h, 0:w]
    return ((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0


def gen_motion(seed: int = 0, v: tuple[float, float] = (3.0, 4.0),
               n_frames: int = 30, fps: float = 30.0, frame_stride: int = 10,
               radii: tuple[float, float] = (12.0, 8.0),
               size: tuple[int, int] = (240, 320),
               depth_scales: Optional[Sequence[float]] = None,
               video_id: str = "motion_000") -> SynthResult:
    """Ellipse translating at constant velocity; optional per-frame depth scale.

    The displacement from frame t to t+1 and the mask radii at frame t both
    use scale s_t, so area-normalized speed is constant by construction.
    """
    h, w = size
    if depth_scales is None:
        scales = np.ones(n_frames)
    else:
        scales = np.asarray(depth_scales, dtype=float)
        if scales.size != n_frames:
            raise ValueError("depth_scales length must equal n_frames")
    # start just inside the frame; every frame re-checks the bounds
    max_r = radii[0] * scales.max(), radii[1] * scales.max()
    cx, cy = max_r[0] + 1.0, max_r[1] + 1.0
    frames: list[FrameRecord] = []
    raw_truth: list[float] = []
    pos = np.array([cx, cy], dtype=float)
    base_speed = math.hypot(*v) * fps / frame_stride
    for t in range(n_frames):
        s = scales[t]
        rx, ry = radii[0] * s, radii[1] * s
        if pos[0] - rx < 0 or pos[0] + rx >= w or pos[1] - ry < 0 or pos[1] + ry >= h:
            raise OutOfFrame(f"frame {t}: ellipse at {pos} with radii {(rx, ry)}")
        grid = _ellipse_grid(h, w, pos[0], pos[1], rx, ry)
        ys, xs = np.nonzero(grid)
        bbox = (float(xs.min()), float(ys.min()),
                float(xs.max() - xs.min() + 1), float(ys.max() - ys.min() + 1))
        frames.append(FrameRecord(
            video_id=video_id, frame_index=t,
            detections=(Detection(bbox=bbox, score=1.0, mask=encode_rle(grid)),)))
        if t < n_frames - 1:
            raw_truth.append(math.hypot(*v) * s * fps / frame_stride)
            pos = pos + np.asarray(v) * s
    manifest = VideoManifest(video_id=video_id, fps=fps, activity="running",
                             frame_stride=frame_stride, width=w, height=h)
    truth = {
        "scenario": "motion",
        "base_speed_px_per_s": base_speed,
        "per_step_raw_px_per_s": raw_truth,
        "depth_scales": list(map(float, scales)),
    }
    return SynthResult("motion", [SynthVideo(manifest, frames)], truth)


def gen_blobs(seed: int = 0, k: int = 3, n_per: int = 100, d: int = 34,
              sigma: float = 0.1, sep: float = 5.0) -> SynthResult:
    """Seeded isotropic Gaussian blobs with minimum center separation."""
    rng = np.random.default_rng(seed)
    centers = np.empty((k, d))
    placed = 0
    while placed < k:
        cand = rng.normal(0.0, max(sep, 1.0), size=d)
        if all(np.linalg.norm(cand - centers[i]) >= sep for i in range(placed)):
            centers[placed] = cand
            placed += 1
    X = np.concatenate([rng.normal(0.0, sigma, size=(n_per, d)) + centers[i]
                        for i in range(k)])
    labels = np.repeat(np.arange(k), n_per)
    truth = {"scenario": "blobs", "k": k, "n_per": n_per,
             "labels": labels.tolist()}
    return SynthResult("blobs", [], truth, points=X, labels=labels)


def _gait_templates(rng: np.random.Generator, n_templates: int,
                    bbox: tuple[float, float, float, float]) -> np.ndarray:
    x, y, w, h = bbox
    return np.stack([
        np.column_stack([rng.uniform(x, x + w, 17), rng.uniform(y, y + h, 17)])
        for _ in range(n_templates)
    ])


def gen_gait(seed: int = 0, n_animals: int = 10, frames_per_animal: int = 60,
             n_templates: Optional[int] = None, noise: float = 0.005,
             mixtures: Optional[np.ndarray] = None,
             fps: float = 30.0, frame_stride: int = 10) -> SynthResult:
    """Poses drawn from fixed keypoint templates plus Gaussian jitter.

    noise is in normalized units (fraction of the bbox diagonal).  mixtures
    is an optional (n_animals, n_templates) row-stochastic matrix; the
    default gives animal i its own template (i mod n_templates).
    """
    rng = np.random.default_rng(seed)
    if n_templates is None:
        n_templates = n_animals
    w_frame, h_frame = 320, 240
    bbox = (60.0, 60.0, 200.0, 120.0)
    diag = math.hypot(bbox[2], bbox[3])
    templates = _gait_templates(rng, n_templates, bbox)
    if mixtures is None:
        mixtures = np.zeros((n_animals, n_templates))
        for i in range(n_animals):
            mixtures[i, i % n_templates] = 1.0
    videos: list[SynthVideo] = []
    assignments: dict[str, list[int]] = {}
    for a in range(n_animals):
        vid = f"gait_{a:03d}"
        draws = rng.choice(n_templates, size=frames_per_animal, p=mixtures[a])
        frames = []
        for t in range(frames_per_animal):
            pts = templates[draws[t]] + rng.normal(0.0, noise * diag, size=(17, 2))
            np.clip(pts[:, 0], 0, w_frame - 1e-6, out=pts[:, 0])
            np.clip(pts[:, 1], 0, h_frame - 1e-6, out=pts[:, 1])
            pose = PoseSet(np.column_stack([pts, np.ones(17)]))
            frames.append(FrameRecord(
                video_id=vid, frame_index=t,
                detections=(Detection(bbox=bbox, score=1.0, keypoints=pose),)))
        videos.append(SynthVideo(
            VideoManifest(video_id=vid, fps=fps, activity="running",
                          frame_stride=frame_stride,
                          width=w_frame, height=h_frame), frames))
        assignments[vid] = draws.tolist()
    truth = {"scenario": "gait", "n_templates": n_templates,
             "template_draws": assignments,
             "mixtures": mixtures.tolist(), "noise": noise}
    return SynthResult("gait", videos, truth)


def _silhouette_template(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    grid = _ellipse_grid(h, w, w * rng.uniform(0.4, 0.6), h * rng.uniform(0.4, 0.6),
                         w * rng.uniform(0.22, 0.38), h * rng.uniform(0.22, 0.38))
    for _ in range(3):
        grid |= _ellipse_grid(h, w, rng.uniform(0.2, 0.8) * w,
                              rng.uniform(0.2, 0.8) * h,
                              rng.uniform(0.08, 0.2) * w,
                              rng.uniform(0.08, 0.2) * h)
    return grid


def gen_resting(seed: int = 0, samples_per_group: int = 80,
                single_templates: int = 1, herd_templates: int = 5,
                flip_prob: float = 0.01,
                views: Sequence[str] = ("front", "side")) -> SynthResult:
    """Silhouettes from fixed mask templates plus pixel-flip noise."""
    rng = np.random.default_rng(seed)
    h_frame, w_frame = 240, 320
    sil_h, sil_w = 100, 140
    off_y, off_x = 60, 80
    bbox = (float(off_x), float(off_y), float(sil_w), float(sil_h))
    videos: list[SynthVideo] = []
    assignments: dict[str, list[int]] = {}
    for view in views:
        for social, n_templates in (("single", single_templates),
                                    ("herd", herd_templates)):
            templates = [_silhouette_template(rng, sil_h, sil_w)
                         for _ in range(n_templates)]
            vid = f"rest_{view}_{social}"
            draws = rng.integers(n_templates, size=samples_per_group)
            frames = []
            for t in range(samples_per_group):
                sil = templates[draws[t]].copy()
                flips = rng.random(sil.shape) < flip_prob
                sil ^= flips
                grid = np.zeros((h_frame, w_frame), dtype=bool)
                grid[off_y:off_y + sil_h, off_x:off_x + sil_w] = sil
                if not grid.any():
                    grid[off_y, off_x] = True
                frames.append(FrameRecord(
                    video_id=vid, frame_index=t,
                    detections=(Detection(bbox=bbox, score=1.0,
                                          mask=encode_rle(grid)),)))
            videos.append(SynthVideo(
                VideoManifest(video_id=vid, fps=30.0, activity="sitting",
                              frame_stride=10, width=w_frame, height=h_frame,
                              view=view, social=social), frames))
            assignments[vid] = draws.tolist()
    truth = {"scenario": "resting", "template_draws": assignments,
             "single_templates": single_templates, "herd_templates": herd_templates,
             "flip_prob": flip_prob}
    return SynthResult("resting", videos, truth)


def gen_grazing(seed: int = 0, videos_per_group: int = 3, n_frames: int = 10,
                green_fraction_single: float = 0.8,
                green_fraction_herd: float = 0.3,
                size: tuple[int, int] = (120, 160)) -> SynthResult:
    """Green/gray imagery with a nose-anchored patch of known green fraction.

    The expected excess-green score per frame is 2 * green_fraction of the
    patch's kept pixels, computed here from the constructed layout.
    """
    h, w = size
    bbox = (float(w // 2 - 30), float(h // 2 - 20), 60.0, 40.0)
    diag = math.hypot(bbox[2], bbox[3])
    side = round(PATCH_SIDE_FACTOR * diag)
    nose = (w / 2.0, h / 2.0)
    x0 = int(round(nose[0] - side / 2.0))
    y0 = int(round(nose[1] - side / 2.0))
    x1, y1 = x0 + side, y0 + side  # interior by construction
    videos: list[SynthVideo] = []
    expected: dict[str, list[float]] = {}
    vid_no = 0
    for social, frac in (("single", green_fraction_single),
                         ("herd", green_fraction_herd)):
        for _ in range(videos_per_group):
            vid = f"graze_{vid_no:03d}"
            vid_no += 1
            # green columns on the left part of the window, gray elsewhere
            n_green_cols = int(round(frac * side))
            image = np.full((h, w, 3), 0.5)
            image[:, :, :] = [0.5, 0.5, 0.5]
            image[:, x0:x0 + n_green_cols] = [0.0, 1.0, 0.0]
            # sheep mask sits above the window and never occludes it
            mask = np.zeros((h, w), dtype=bool)
            mask[0:max(1, y0 - 2), :] = True
            pts = np.tile([bbox[0], bbox[1], 1.0], (17, 1))
            pts[2] = [nose[0], nose[1], 1.0]
            score = 2.0 * (n_green_cols * side) / (side * side)
            frames = []
            imagery: dict[int, np.ndarray] = {}
            for t in range(n_frames):
                frames.append(FrameRecord(
                    video_id=vid, frame_index=t,
                    detections=(Detection(bbox=bbox, score=1.0,
                                          keypoints=PoseSet(pts.copy()),
                                          mask=encode_rle(mask)),)))
                imagery[t] = image
            videos.append(SynthVideo(
                VideoManifest(video_id=vid, fps=30.0, activity="grazing",
                              frame_stride=10, width=w, height=h,
                              social=social), frames, imagery=imagery))
            expected[vid] = [score] * n_frames
    truth = {"scenario": "grazing", "expected_scores": expected,
             "green_fraction_single": green_fraction_single,
             "green_fraction_herd": green_fraction_herd,
             "window": [x0, y0, x1, y1]}
    return SynthResult("grazing", videos, truth)


def write_synth(result: SynthResult, out_dir: str | Path) -> list[Path]:
    """Emit a scenario tree: one directory per video plus truth.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for video in result.videos:
        vdir = out / video.manifest.video_id
        vdir.mkdir(parents=True, exist_ok=True)
        mpath, fpath = vdir / "manifest.json", vdir / "frames.jsonl"
        write_video(video.manifest, video.frames, mpath, fpath)
        written += [mpath, fpath]
        if video.imagery is not None:
            img_dir = vdir / "imagery"
            img_dir.mkdir(exist_ok=True)
            index = {}
            for t in sorted(video.imagery):
                ppm = img_dir / f"frame_{t:06d}.ppm"
                write_ppm(ppm, video.imagery[t])
                index[str(t)] = f"imagery/frame_{t:06d}.ppm"
                written.append(ppm)
            ipath = vdir / "imagery_index.json"
            ipath.write_text(json.dumps(index, sort_keys=True) + "\n",
                             encoding="utf-8", newline="\n")
            written.append(ipath)
    if result.points is not None:
        ppath = out / "points.csv"
        header = ",".join(["label"] + [f"d{j}" for j in range(result.points.shape[1])])
        rows = [header] + [
            ",".join([str(int(result.labels[i]))] +
                     [repr(float(v)) for v in result.points[i]])
            for i in range(result.points.shape[0])
        ]
        ppath.write_text("".join(r + "\n" for r in rows), encoding="utf-8", newline="\n")
        written.append(ppath)
    tpath = out / "truth.json"
    tpath.write_text(json.dumps(result.truth, sort_keys=True, indent=2) + "\n",
                     encoding="utf-8", newline="\n")
    written.append(tpath)
    return written
