"""herdlens: behavioral analytics over per-frame animal perception outputs."""

from .cluster import ClusterConfig, KMeans, adjusted_rand_index, kmeans
from .embed import UMAP, EmbeddingConfig, umap
from .gait import analyze_running
from .graze import analyze_grazing
from .interchange import (Detection, FrameRecord, PoseSet, RleMask,
                          VideoManifest, decode_rle, encode_rle, read_video,
                          write_video)
from .rest import analyze_resting, extract_rest_samples
from .speed import analyze_speed

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig", "KMeans", "adjusted_rand_index", "kmeans",
    "UMAP", "EmbeddingConfig", "umap",
    "Detection", "FrameRecord", "PoseSet", "RleMask", "VideoManifest",
    "decode_rle", "encode_rle", "read_video", "write_video",
    "analyze_running", "analyze_speed", "analyze_grazing",
    "analyze_resting", "extract_rest_samples",
    "__version__",
]
