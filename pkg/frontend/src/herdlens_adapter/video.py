"""Frame access for the export pipeline.

A "video" here is a directory of 8-bit P6 PPM frames in lexical order (the
typical output of an upstream frame extractor); container demuxing is out of
scope for this environment.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DecodeError


def read_ppm(path: Path) -> np.ndarray:
    """Parse an 8-bit binary PPM into an (h, w, 3) uint8 array."""
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DecodeError(f"{path}: {exc}") from exc
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
        if pos == start:
            raise DecodeError(f"{path}: truncated header")
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise DecodeError(f"{path}: not a binary PPM")
    try:
        w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError as exc:
        raise DecodeError(f"{path}: bad header field") from exc
    if maxval != 255:
        raise DecodeError(f"{path}: only 8-bit PPM supported")
    pos += 1
    if len(data) - pos < h * w * 3:
        raise DecodeError(f"{path}: pixel data truncated")
    pixels = np.frombuffer(data, dtype=np.uint8, count=h * w * 3, offset=pos)
    return pixels.reshape(h, w, 3)


def write_ppm(path: Path, image: np.ndarray) -> None:
    img = np.asarray(image, dtype=np.uint8)
    h, w, _ = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def list_frames(video_path: Path) -> list[Path]:
    """All PPM frames of the video, in lexical (temporal) order."""
    root = Path(video_path)
    if not root.is_dir():
        raise DecodeError(f"{root}: not a frame directory")
    frames = sorted(p for p in root.iterdir() if p.suffix == ".ppm")
    if not frames:
        raise DecodeError(f"{root}: no .ppm frames found")
    return frames


def kept_frames(video_path: Path, stride: int) -> list[tuple[int, Path]]:
    """(kept_index, path) pairs after applying the frame stride."""
    frames = list_frames(video_path)
    return list(enumerate(frames[::stride]))
