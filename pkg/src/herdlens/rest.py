"""Resting-posture analysis: standardized silhouettes, per-view embedding, dispersion."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cluster import ClusterConfig, kmeans
from .embed import EmbeddingConfig, umap
from .errors import MissingSocialLabel, MissingViewLabel, TooFewSamples
from .interchange import FrameRecord, VideoManifest, decode_rle

STANDARD_DIM = 64  # resting silhouettes resized to 64x64
REST_N_NEIGHBORS = 50
REST_MIN_DIST = 0.01
REST_K = 10

GROUPS = ("front_herd", "side_herd", "front_single", "side_single")


@dataclass(frozen=True)
class RestSample:
    group: str
    vector: np.ndarray  # 4096 binary values
    video_id: str
    frame_index: int
    detection_index: int

    @property
    def view(self) -> str:
        return self.group.split("_")[0]

    @property
    def social(self) -> str:
        return self.group.split("_")[1]


@dataclass
class ViewRestResult:
    view: str
    sample_indices: np.ndarray  # into the input sample list
    embedding: np.ndarray
    labels: np.ndarray
    dispersion: dict[str, float]  # per social group, RMS distance to group mean
    herd_single_ratio: Optional[float]
    warnings: list[str] = field(default_factory=list)


@dataclass
class RestReport:
    samples: list[RestSample]
    views: dict[str, ViewRestResult]


def _crop_resize(grid: np.ndarray, bbox: tuple[float, float, float, float],
                 dim: int) -> np.ndarray:
    from .maskops import resize_nearest

    x, y, w, h = bbox
    x0, y0 = int(math.floor(x)), int(math.floor(y))
    x1, y1 = int(math.ceil(x + w)), int(math.ceil(y + h))
    gh, gw = grid.shape
    x0, y0 = max(0, x0), max(0, y0)
    x1, y1 = min(gw, max(x1, x0 + 1)), min(gh, max(y1, y0 + 1))
    return resize_nearest(grid[y0:y1, x0:x1], dim, dim)


def extract_rest_samples(videos: Sequence[tuple[VideoManifest, Sequence[FrameRecord]]],
                         dim: int = STANDARD_DIM) -> list[RestSample]:
    """One sample per masked detection: bbox-cropped silhouette at dim x dim."""
    out: list[RestSample] = []
    for manifest, frames in sorted(videos, key=lambda v: v[0].video_id):
        if manifest.view is None:
            raise MissingViewLabel(f"video {manifest.video_id} lacks a view label")
        if manifest.social is None:
            raise MissingSocialLabel(f"video {manifest.video_id} lacks a social label")
        group = f"{manifest.view}_{manifest.social}"
        for fr in frames:
            for di, det in enumerate(fr.detections):
                if det.mask is None:
                    continue
                grid = decode_rle(det.mask)
                vec = _crop_resize(grid, det.bbox, dim).astype(np.float64).ravel()
                out.append(RestSample(group=group, vector=vec,
                                      video_id=manifest.video_id,
                                      frame_index=fr.frame_index,
                                      detection_index=di))
    return out


def group_dispersion(coords: np.ndarray) -> float:
    """RMS Euclidean distance to the centroid of the given coordinates."""
    center = coords.mean(axis=0)
    return float(np.sqrt(((coords - center) ** 2).sum(axis=1).mean()))


def analyze_resting(samples: Sequence[RestSample],
                    embed_cfg: Optional[EmbeddingConfig] = None,
                    cluster_cfg: Optional[ClusterConfig] = None) -> RestReport:
    """Embed each view's pool separately; quantify single vs herd spread."""
    if embed_cfg is None:
        embed_cfg = EmbeddingConfig(n_neighbors=REST_N_NEIGHBORS, min_dist=REST_MIN_DIST)
    if cluster_cfg is None:
        cluster_cfg = ClusterConfig(k=REST_K)

    views: dict[str, ViewRestResult] = {}
    for view in ("front", "side"):
        idx = np.array([i for i, s in enumerate(samples) if s.view == view], dtype=int)
        if idx.size == 0:
            continue
        if idx.size <= embed_cfg.n_neighbors or idx.size < cluster_cfg.k:
            raise TooFewSamples(
                f"view {view}: {idx.size} samples, need > n_neighbors="
                f"{embed_cfg.n_neighbors} and >= k={cluster_cfg.k}")
        X = np.stack([samples[i].vector for i in idx])
        result = umap(X, embed_cfg)
        clustering = kmeans(result.coords, cluster_cfg)
        dispersion: dict[str, float] = {}
        for social in ("single", "herd"):
            member = np.array([samples[i].social == social for i in idx])
            if member.any():
                dispersion[social] = group_dispersion(result.coords[member])
        ratio = None
        if "single" in dispersion and "herd" in dispersion and dispersion["single"] > 0:
            ratio = dispersion["herd"] / dispersion["single"]
        views[view] = ViewRestResult(
            view=view, sample_indices=idx, embedding=result.coords,
            labels=clustering.labels, dispersion=dispersion,
            herd_single_ratio=ratio, warnings=list(result.warnings))
    if not views:
        raise TooFewSamples("no samples in any view")
    return RestReport(samples=list(samples), views=views)
