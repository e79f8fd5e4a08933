import numpy as np
import pytest

from herdlens.errors import (DimensionMismatch, LowConfidenceNose,
                             MissingImagery, MissingSocialLabel)
from herdlens.graze import (analyze_grazing, analyze_video, bootstrap_ci,
                            grazing_patch, green_score, read_ppm, write_ppm)
from herdlens.interchange import PoseSet
from herdlens.maskops import PatchWindow
from herdlens.synth import gen_grazing


def _pose_with_nose(nx, ny, conf=1.0):
    pts = np.tile([1.0, 1.0, 1.0], (17, 1))
    pts[2] = [nx, ny, conf]
    return PoseSet(pts)


def test_patch_geometry():
    # bbox diagonal 100 -> side 40, centered at the nose
    win = grazing_patch(_pose_with_nose(100.0, 100.0), bbox=(0, 0, 60.0, 80.0),
                        frame_w=300, frame_h=300)
    assert (win.x0, win.y0, win.x1, win.y1) == (80, 80, 120, 120)


def test_patch_clipped_at_corner():
    win = grazing_patch(_pose_with_nose(2.0, 2.0), bbox=(0, 0, 60.0, 80.0),
                        frame_w=300, frame_h=300)
    assert win.x0 == 0 and win.y0 == 0
    assert not win.empty


def test_low_confidence_nose():
    with pytest.raises(LowConfidenceNose):
        grazing_patch(_pose_with_nose(10, 10, conf=0.1), bbox=(0, 0, 60, 80),
                      frame_w=300, frame_h=300)


def test_pure_green_scores_two():
    image = np.zeros((20, 20, 3))
    image[..., 1] = 1.0
    sample = green_score(image, PatchWindow(2, 2, 10, 10), [])
    assert sample.green_score == 2.0
    assert sample.keep_pixels == 64


def test_gray_scores_zero():
    for v in (0.2, 0.5, 1.0):
        image = np.full((20, 20, 3), v)
        sample = green_score(image, PatchWindow(0, 0, 20, 20), [])
        assert sample.green_score == 0.0


def test_half_occluded_gray_half_scores_two():
    # left half green, right half gray; mask covers exactly the gray half
    image = np.full((10, 16, 3), 0.5)
    image[:, :8] = [0.0, 1.0, 0.0]
    mask = np.zeros((10, 16), dtype=bool)
    mask[:, 8:] = True
    sample = green_score(image, PatchWindow(0, 0, 16, 10), [mask])
    assert sample.green_score == pytest.approx(2.0, abs=1e-9)
    assert sample.keep_pixels == 80


def test_fully_occluded_flagged_not_zero():
    image = np.full((10, 10, 3), 0.5)
    mask = np.ones((10, 10), dtype=bool)
    sample = green_score(image, PatchWindow(0, 0, 10, 10), [mask])
    assert sample.occluded
    assert np.isnan(sample.green_score)


def test_exg_linearity_in_channel_scale():
    rng = np.random.default_rng(0)
    image = rng.random((12, 12, 3))
    win = PatchWindow(1, 1, 11, 11)
    s1 = green_score(image, win, []).green_score
    s2 = green_score(image * 0.5, win, []).green_score
    assert s2 == pytest.approx(0.5 * s1, rel=1e-12)


def test_mask_monotonicity_over_non_green():
    image = np.full((10, 10, 3), 0.5)
    image[:, :5] = [0.0, 1.0, 0.0]
    win = PatchWindow(0, 0, 10, 10)
    base = green_score(image, win, []).green_score
    occluder = np.zeros((10, 10), dtype=bool)
    occluder[:, 7:] = True  # hides gray pixels only
    masked = green_score(image, win, [occluder]).green_score
    assert masked >= base


def test_dimension_mismatch():
    image = np.zeros((10, 10, 3))
    with pytest.raises(DimensionMismatch):
        green_score(image, PatchWindow(0, 0, 5, 5),
                    [np.zeros((8, 8), dtype=bool)])


def test_ppm_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = (rng.random((7, 9, 3)) * 255).astype(np.uint8)
    write_ppm(tmp_path / "a.ppm", img)
    back = read_ppm(tmp_path / "a.ppm")
    assert np.array_equal((back * 255).astype(np.uint8), img)


def _load_scenario(tmp_path, seed=0, **kwargs):
    from herdlens.graze import load_imagery_index
    from herdlens.interchange import read_video
    from herdlens.synth import write_synth

    sr = gen_grazing(seed=seed, **kwargs)
    write_synth(sr, tmp_path)
    videos = []
    for v in sr.videos:
        vdir = tmp_path / v.manifest.video_id
        manifest, frames, issues = read_video(vdir / "manifest.json",
                                              vdir / "frames.jsonl")
        assert issues == []
        videos.append((manifest, frames,
                       load_imagery_index(vdir / "imagery_index.json")))
    return sr, videos


def test_engine_matches_generator_truth_exactly(tmp_path):
    sr, videos = _load_scenario(tmp_path)
    report = analyze_grazing(videos, seed=0)
    for r in report.videos:
        expected = sr.truth["expected_scores"][r.video_id]
        assert np.allclose(r.scores, expected, atol=1e-12)
        assert np.allclose(r.deltas, 0.0)


def test_single_exceeds_herd(tmp_path):
    sr, videos = _load_scenario(tmp_path)
    report = analyze_grazing(videos, seed=0)
    assert report.groups["single"].mean > report.groups["herd"].mean
    for g in report.groups.values():
        members = [r.activity_index for r in report.videos
                   if report.groups.get(r.social) is g]
        assert g.mean == pytest.approx(np.mean(members))


def test_identical_videos_degenerate_bootstrap(tmp_path):
    sr, videos = _load_scenario(tmp_path, videos_per_group=2,
                                green_fraction_single=0.5,
                                green_fraction_herd=0.5)
    report = analyze_grazing(videos, seed=0)
    assert report.groups["single"].mean == report.groups["herd"].mean
    assert report.groups["single"].ci_low == report.groups["single"].ci_high


def test_missing_social_label():
    from herdlens.interchange import VideoManifest
    manifest = VideoManifest(video_id="v", fps=30, activity="grazing",
                             width=10, height=10)
    with pytest.raises(MissingSocialLabel):
        analyze_video(manifest, [], {})


def test_missing_imagery(tmp_path):
    with pytest.raises(MissingImagery):
        from herdlens.graze import load_imagery_index
        load_imagery_index(tmp_path / "missing.json")


def test_bootstrap_deterministic():
    vals = np.array([1.0, 2.0, 3.0, 4.0])
    assert bootstrap_ci(vals, seed=5) == bootstrap_ci(vals, seed=5)
