"""Gait analysis: normalized pose features, embedding, clustering, per-animal stats."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cluster import ClusterConfig, GroupDistribution, cluster_distribution, kmeans
from .embed import EmbeddingConfig, umap
from .errors import DegenerateBBox, TooFewFeatures
from .interchange import FrameRecord, PoseSet, VideoManifest
from .maskops import largest_mask

MIN_CONF_DEFAULT = 0.3
MIN_VISIBLE_DEFAULT = 13

GAIT_N_NEIGHBORS = 20  # encapsulates the pose neighborhood of a running animal
GAIT_K = 10


@dataclass(frozen=True)
class GaitFeature:
    animal_id: str
    frame_index: int
    vector: np.ndarray  # 34 floats, (x, y) per keypoint


@dataclass
class AnimalGaitStats:
    histogram: np.ndarray
    dominant_cluster: int
    dominance_ratio: float
    occupied_clusters: int
    n_features: int


@dataclass
class GaitReport:
    features: list[GaitFeature]
    embedding: np.ndarray
    labels: np.ndarray
    per_animal: dict[str, AnimalGaitStats]
    warnings: list[str] = field(default_factory=list)


def pose_to_feature(pose: PoseSet, bbox: tuple[float, float, float, float],
                    min_conf: float = MIN_CONF_DEFAULT,
                    min_visible: int = MIN_VISIBLE_DEFAULT) -> Optional[np.ndarray]:
    """Center on accepted keypoints, scale by bbox diagonal, interleave (x, y).

    Returns None when fewer than min_visible keypoints reach min_conf.
    Rejected keypoints are imputed at the accepted mean (zero after centering).
    """
    pts = pose.points
    _, _, w, h = bbox
    diag = math.hypot(w, h)
    if diag <= 0:
        raise DegenerateBBox(f"bbox {bbox} has zero diagonal")
    accepted = pts[:, 2] >= min_conf
    if int(accepted.sum()) < min_visible:
        return None
    mean = pts[accepted, :2].mean(axis=0)
    xy = np.where(accepted[:, None], pts[:, :2] - mean, 0.0) / diag
    return xy.ravel()  # x0, y0, x1, y1, ...


def extract_features(manifest: VideoManifest, frames: Sequence[FrameRecord],
                     min_conf: float = MIN_CONF_DEFAULT,
                     min_visible: int = MIN_VISIBLE_DEFAULT) -> list[GaitFeature]:
    """One feature per frame, from the primary (largest-mask) detection."""
    out: list[GaitFeature] = []
    for fr in frames:
        det = None
        if any(d.mask is not None for d in fr.detections):
            det = fr.detections[largest_mask(fr)]
        elif fr.detections:
            det = fr.detections[0]
        if det is None or det.keypoints is None:
            continue
        vec = pose_to_feature(det.keypoints, det.bbox, min_conf, min_visible)
        if vec is None:
            continue
        animal = manifest.video_id
        if det.track_id is not None:
            animal = f"{manifest.video_id}#{det.track_id}"
        out.append(GaitFeature(animal_id=animal, frame_index=fr.frame_index, vector=vec))
    return out


def analyze_running(videos: Sequence[tuple[VideoManifest, Sequence[FrameRecord]]],
                    embed_cfg: Optional[EmbeddingConfig] = None,
                    cluster_cfg: Optional[ClusterConfig] = None,
                    min_conf: float = MIN_CONF_DEFAULT,
                    min_visible: int = MIN_VISIBLE_DEFAULT) -> GaitReport:
    """Pool features from all animals, embed, cluster, report per-animal spread."""
    if embed_cfg is None:
        embed_cfg = EmbeddingConfig(n_neighbors=GAIT_N_NEIGHBORS)
    if cluster_cfg is None:
        cluster_cfg = ClusterConfig(k=GAIT_K)

    features: list[GaitFeature] = []
    for manifest, frames in sorted(videos, key=lambda v: v[0].video_id):
        features.extend(extract_features(manifest, frames, min_conf, min_visible))
    if len(features) < cluster_cfg.k:
        raise TooFewFeatures(
            f"{len(features)} pose features < k={cluster_cfg.k}")

    X = np.stack([f.vector for f in features])
    result = umap(X, embed_cfg)
    clustering = kmeans(result.coords, cluster_cfg)
    dist = cluster_distribution(
        clustering.labels, [f.animal_id for f in features], k=cluster_cfg.k)
    per_animal = {
        animal: AnimalGaitStats(
            histogram=gd.counts,
            dominant_cluster=gd.dominant,
            dominance_ratio=gd.dominance_ratio,
            occupied_clusters=int(np.count_nonzero(gd.counts)),
            n_features=gd.size,
        )
        for animal, gd in dist.items()
    }
    return GaitReport(features=features, embedding=result.coords,
                      labels=clustering.labels, per_animal=per_animal,
                      warnings=list(result.warnings))
