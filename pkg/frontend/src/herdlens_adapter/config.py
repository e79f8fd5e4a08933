from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError

DEFAULT_PROMPT = "sheep"
DEFAULT_SCORE_THRESHOLD = 0.35
DEFAULT_STRIDE = 10


@dataclass(frozen=True)
class AdapterConfig:
    """Everything the export pipeline needs besides the video itself.

    checkpoints maps model role ("detector", "segmenter", "pose") to a
    checkpoint path; the synthetic backend ignores it.
    """

    out_dir: Path
    prompt: str = DEFAULT_PROMPT
    score_threshold: float = DEFAULT_SCORE_THRESHOLD
    frame_stride: int = DEFAULT_STRIDE
    device: str = "cpu"
    checkpoints: dict[str, Path] = field(default_factory=dict)

    def __post_init__(self):
        if not (0.0 <= self.score_threshold <= 1.0):
            raise ConfigError(
                f"score_threshold {self.score_threshold} outside [0, 1]")
        if self.frame_stride < 1:
            raise ConfigError(f"frame_stride {self.frame_stride} must be >= 1")
        if not self.prompt:
            raise ConfigError("prompt is empty")
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(
            self, "checkpoints",
            {k: Path(v) for k, v in self.checkpoints.items()})
