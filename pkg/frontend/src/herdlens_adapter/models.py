"""Perception model backends.

The export pipeline talks to three black boxes: a text-grounded detector, a
box-promptable instance segmenter, and a per-box pose estimator. Any object
with this interface plugs in; the checkpoint backend wraps real models, the
synthetic backend exists so the pipeline and its tests run without weights.
"""

from __future__ import annotations

from collections import deque
from typing import Protocol

import numpy as np

from .config import AdapterConfig
from .errors import ModelLoadError

N_KEYPOINTS = 17


class PerceptionBackend(Protocol):
    def detect(self, image: np.ndarray, prompt: str
               ) -> list[tuple[tuple[float, float, float, float], float]]:
        """Score-ordered (bbox, score) pairs for objects matching prompt."""

    def segment(self, image: np.ndarray,
                bbox: tuple[float, float, float, float]) -> np.ndarray:
        """Full-frame boolean mask for the object in bbox."""

    def estimate_pose(self, image: np.ndarray,
                      bbox: tuple[float, float, float, float]) -> np.ndarray:
        """(17, 3) keypoints (x, y, confidence) for the object in bbox."""


class CheckpointBackend:
    """Wraps real model weights. Only checkpoint resolution happens here;
    the heavy lifting belongs to the upstream model libraries."""

    REQUIRED = ("detector", "segmenter", "pose")

    def __init__(self, config: AdapterConfig):
        for role in self.REQUIRED:
            path = config.checkpoints.get(role)
            if path is None:
                raise ModelLoadError(f"no checkpoint configured for {role!r}")
            if not path.is_file():
                raise ModelLoadError(f"{role} checkpoint not found: {path}")
        raise ModelLoadError(
            "model runtimes are not available in this environment; "
            "use the synthetic backend")


class SyntheticBackend:
    """Deterministic stand-in: bright connected regions are the animals.

    detect thresholds mean brightness and returns one box per connected
    component; segment returns the component's pixels; estimate_pose lays
    17 points on a fixed grid inside the box. Pure numpy, no weights.
    """

    def __init__(self, label: str = "sheep", brightness: int = 128,
                 min_pixels: int = 16):
        self.label = label
        self.brightness = brightness
        self.min_pixels = min_pixels

    def _foreground(self, image: np.ndarray) -> np.ndarray:
        return image.astype(np.uint16).sum(axis=2) >= 3 * self.brightness

    def _components(self, fg: np.ndarray) -> list[np.ndarray]:
        h, w = fg.shape
        seen = np.zeros_like(fg)
        comps = []
        for sy, sx in zip(*np.nonzero(fg)):
            if seen[sy, sx]:
                continue
            comp = np.zeros_like(fg)
            queue = deque([(sy, sx)])
            seen[sy, sx] = True
            while queue:
                y, x = queue.popleft()
                comp[y, x] = True
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and fg[ny, nx] \
                            and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            if int(comp.sum()) >= self.min_pixels:
                comps.append(comp)
        return comps

    def detect(self, image, prompt):
        if prompt != self.label:
            return []
        out = []
        for comp in self._components(self._foreground(image)):
            ys, xs = np.nonzero(comp)
            x0, y0 = float(xs.min()), float(ys.min())
            bw = float(xs.max() - xs.min() + 1)
            bh = float(ys.max() - ys.min() + 1)
            fill = float(comp.sum() / (bw * bh))
            out.append(((x0, y0, bw, bh), min(1.0, fill)))
        out.sort(key=lambda d: (-d[1], d[0]))
        return out

    def segment(self, image, bbox):
        x, y, w, h = bbox
        fg = self._foreground(image)
        keep = np.zeros_like(fg)
        y0, y1 = int(y), int(y + h)
        x0, x1 = int(x), int(x + w)
        keep[y0:y1, x0:x1] = fg[y0:y1, x0:x1]
        return keep

    def estimate_pose(self, image, bbox):
        x, y, w, h = bbox
        # 17 points on a fixed interior lattice, confidence 1
        fx = np.array([0.2, 0.5, 0.8] * 5 + [0.35, 0.65])
        fy = np.repeat(np.linspace(0.15, 0.85, 6), [3, 3, 3, 3, 3, 2])
        pts = np.column_stack([x + fx * w, y + fy * h, np.ones(N_KEYPOINTS)])
        return pts


def load_backend(name: str, config: AdapterConfig) -> PerceptionBackend:
    if name == "synthetic":
        return SyntheticBackend(label=config.prompt)
    if name == "checkpoint":
        return CheckpointBackend(config)
    raise ModelLoadError(f"unknown backend {name!r}")
