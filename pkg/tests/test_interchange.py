import json

import numpy as np
import pytest

from herdlens.errors import RleOverflow, SumMismatch
from herdlens.interchange import (Detection, FrameRecord, PoseSet, RleMask,
                                  VideoManifest, decode_rle, encode_rle,
                                  read_video, write_video)


def test_decode_all_zero():
    grid = decode_rle(RleMask(size=(1, 4), counts=(4,)))
    assert grid.shape == (1, 4)
    assert not grid.any()


def test_decode_all_one():
    grid = decode_rle(RleMask(size=(2, 2), counts=(0, 4)))
    assert grid.all()


def test_decode_hand_unrolled():
    # row-major bits 011001 on a 2x3 grid
    grid = decode_rle(RleMask(size=(2, 3), counts=(1, 2, 2, 1)))
    expected = np.array([[0, 1, 1], [0, 0, 1]], dtype=bool)
    assert np.array_equal(grid, expected)
    assert encode_rle(grid) == RleMask(size=(2, 3), counts=(1, 2, 2, 1))


def test_decode_sum_mismatch():
    with pytest.raises(SumMismatch):
        decode_rle(RleMask(size=(2, 2), counts=(3,)))


def test_decode_overflow():
    with pytest.raises(RleOverflow):
        decode_rle(RleMask(size=(2, 2), counts=(5,)))


def test_encode_trivial():
    assert encode_rle(np.zeros((1, 4), dtype=bool)).counts == (4,)
    assert encode_rle(np.ones((2, 2), dtype=bool)).counts == (0, 4)


def test_encode_canonical_no_interior_zeros():
    rng = np.random.default_rng(0)
    for _ in range(200):
        g = rng.random((5, 7)) < 0.5
        counts = encode_rle(g).counts
        assert all(c > 0 for c in counts[1:])


def test_round_trip_identity_1000_seeds():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        g = rng.random((16, 16)) < rng.random()
        assert np.array_equal(decode_rle(encode_rle(g)), g)


def test_canonical_uniqueness():
    rng = np.random.default_rng(1)
    seen = {}
    for _ in range(300):
        g = rng.random((6, 6)) < 0.5
        enc = encode_rle(g)
        key = g.tobytes()
        if key in seen:
            assert seen[key] == enc
        else:
            for other_key, other_enc in seen.items():
                if other_enc == enc:
                    assert other_key == key
            seen[key] = enc


def _sample_video():
    manifest = VideoManifest(video_id="v0", fps=30.0, activity="running",
                             width=64, height=48)
    rng = np.random.default_rng(7)
    frames = []
    for t in range(5):
        grid = rng.random((48, 64)) < 0.3
        pose = PoseSet(np.column_stack([
            rng.uniform(0, 64, 17), rng.uniform(0, 48, 17), rng.uniform(0, 1, 17)]))
        det = Detection(bbox=(4.0, 3.0, 40.0, 30.0), score=0.9, track_id=1,
                        keypoints=pose, mask=encode_rle(grid))
        frames.append(FrameRecord(video_id="v0", frame_index=t, detections=(det,)))
    return manifest, frames


def test_reader_writer_round_trip_byte_exact(tmp_path):
    manifest, frames = _sample_video()
    m1, f1 = tmp_path / "manifest.json", tmp_path / "frames.jsonl"
    write_video(manifest, frames, m1, f1)
    rm, rframes, issues = read_video(m1, f1)
    assert issues == []
    m2, f2 = tmp_path / "manifest2.json", tmp_path / "frames2.jsonl"
    write_video(rm, rframes, m2, f2)
    assert m1.read_bytes() == m2.read_bytes()
    assert f1.read_bytes() == f2.read_bytes()


def test_empty_frames_file(tmp_path):
    manifest, _ = _sample_video()
    write_video(manifest, [], tmp_path / "m.json", tmp_path / "f.jsonl")
    _, frames, issues = read_video(tmp_path / "m.json", tmp_path / "f.jsonl")
    assert frames == [] and issues == []


def test_bbox_out_of_bounds_reported(tmp_path):
    manifest, _ = _sample_video()
    det = Detection(bbox=(50.0, 3.0, 40.0, 30.0), score=0.9)  # 50+40 > 64
    fr = FrameRecord(video_id="v0", frame_index=0, detections=(det,))
    write_video(manifest, [fr], tmp_path / "m.json", tmp_path / "f.jsonl")
    _, _, issues = read_video(tmp_path / "m.json", tmp_path / "f.jsonl")
    assert any(i.kind == "InvariantViolation" and "width" in i.message for i in issues)


def test_truncated_line_reports_line_number(tmp_path):
    manifest, frames = _sample_video()
    m, f = tmp_path / "m.json", tmp_path / "f.jsonl"
    write_video(manifest, frames, m, f)
    text = f.read_text().splitlines()
    text[2] = text[2][:20]
    f.write_text("".join(l + "\n" for l in text))
    _, parsed, issues = read_video(m, f)
    assert any(i.kind == "ParseError" and i.where == "line 3" for i in issues)
    assert len(parsed) == len(frames) - 1


def test_video_id_mismatch(tmp_path):
    manifest, frames = _sample_video()
    bad = FrameRecord(video_id="other", frame_index=99, detections=())
    write_video(manifest, list(frames) + [bad],
                tmp_path / "m.json", tmp_path / "f.jsonl")
    _, _, issues = read_video(tmp_path / "m.json", tmp_path / "f.jsonl")
    assert any(i.kind == "ManifestMismatch" for i in issues)


def test_non_increasing_frame_index(tmp_path):
    manifest, frames = _sample_video()
    m, f = tmp_path / "m.json", tmp_path / "f.jsonl"
    write_video(manifest, [frames[1], frames[0]], m, f)
    _, _, issues = read_video(m, f)
    assert any("strictly increasing" in i.message for i in issues)


def test_manifest_invariants():
    bad = VideoManifest(video_id="v", fps=-1.0, activity="flying",
                        width=0, height=10, frame_stride=0)
    problems = bad.validate()
    assert len(problems) >= 4
