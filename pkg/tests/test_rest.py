import numpy as np
import pytest

from herdlens.cluster import ClusterConfig
from herdlens.embed import EmbeddingConfig
from herdlens.errors import MissingSocialLabel, MissingViewLabel, TooFewSamples
from herdlens.interchange import (Detection, FrameRecord, VideoManifest,
                                  encode_rle)
from herdlens.rest import (STANDARD_DIM, analyze_resting, extract_rest_samples,
                           group_dispersion)
from herdlens.synth import gen_resting


def _video(view="front", social="single", n=2, fill=True):
    grid = np.zeros((40, 60), dtype=bool)
    if fill:
        grid[10:30, 15:45] = True
    frames = [FrameRecord(video_id="v", frame_index=t, detections=(
        Detection(bbox=(15.0, 10.0, 30.0, 20.0), score=1.0,
                  mask=encode_rle(grid)),)) for t in range(n)]
    manifest = VideoManifest(video_id="v", fps=30, activity="sitting",
                             width=60, height=40, view=view, social=social)
    return manifest, frames


def test_sample_extraction_shape_and_group():
    samples = extract_rest_samples([_video()])
    assert len(samples) == 2
    s = samples[0]
    assert s.group == "front_single"
    assert s.view == "front" and s.social == "single"
    assert s.vector.shape == (STANDARD_DIM * STANDARD_DIM,)
    assert set(np.unique(s.vector)) <= {0.0, 1.0}


def test_full_bbox_mask_standardizes_to_all_ones():
    # the crop covers exactly the set region, so the resize sees solid ones
    samples = extract_rest_samples([_video()])
    assert samples[0].vector.sum() == STANDARD_DIM * STANDARD_DIM


def test_scale_invariance_of_standardized_silhouette():
    # same shape at 2x resolution standardizes to the same 64x64 vector
    small = np.zeros((40, 60), dtype=bool)
    small[10:30, 15:45] = True
    big = np.repeat(np.repeat(small, 2, axis=0), 2, axis=1)
    mk = lambda grid, bbox, w, h: (
        VideoManifest(video_id="v", fps=30, activity="sitting",
                      width=w, height=h, view="front", social="single"),
        [FrameRecord(video_id="v", frame_index=0, detections=(
            Detection(bbox=bbox, score=1.0, mask=encode_rle(grid)),))])
    s0 = extract_rest_samples([mk(small, (15.0, 10.0, 30.0, 20.0), 60, 40)])[0]
    s1 = extract_rest_samples([mk(big, (30.0, 20.0, 60.0, 40.0), 120, 80)])[0]
    assert np.array_equal(s0.vector, s1.vector)


def test_missing_labels():
    m, frames = _video()
    m_noview = VideoManifest(video_id="v", fps=30, activity="sitting",
                             width=60, height=40, social="single")
    with pytest.raises(MissingViewLabel):
        extract_rest_samples([(m_noview, frames)])
    m_nosocial = VideoManifest(video_id="v", fps=30, activity="sitting",
                               width=60, height=40, view="front")
    with pytest.raises(MissingSocialLabel):
        extract_rest_samples([(m_nosocial, frames)])


def test_group_dispersion_values():
    assert group_dispersion(np.zeros((5, 2))) == 0.0
    # four points at distance 1 from their center
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    assert group_dispersion(pts) == pytest.approx(1.0)
    # translation invariant
    assert group_dispersion(pts + 100.0) == pytest.approx(1.0)


def test_too_few_samples():
    samples = extract_rest_samples([_video(n=4)])
    with pytest.raises(TooFewSamples):
        analyze_resting(samples)


def _small_rest_cfgs():
    return (EmbeddingConfig(n_neighbors=15, min_dist=0.01, n_epochs=150, seed=0),
            ClusterConfig(k=6, seed=0))


def test_herd_disperses_more_than_single():
    sr = gen_resting(seed=0, samples_per_group=40)
    vids = [(v.manifest, v.frames) for v in sr.videos]
    samples = extract_rest_samples(vids)
    report = analyze_resting(samples, *_small_rest_cfgs())
    assert set(report.views) == {"front", "side"}
    for view, res in report.views.items():
        assert res.herd_single_ratio is not None
        assert res.herd_single_ratio > 1.5
        assert res.embedding.shape == (len(res.sample_indices), 2)
        assert res.labels.shape == (len(res.sample_indices),)


def test_views_embedded_independently():
    sr = gen_resting(seed=1, samples_per_group=40)
    vids = [(v.manifest, v.frames) for v in sr.videos]
    samples = extract_rest_samples(vids)
    full = analyze_resting(samples, *_small_rest_cfgs())
    front_only = [s for s in samples if s.view == "front"]
    alone = analyze_resting(front_only, *_small_rest_cfgs())
    assert np.array_equal(full.views["front"].embedding,
                          alone.views["front"].embedding)


def test_deterministic():
    sr = gen_resting(seed=2, samples_per_group=40)
    vids = [(v.manifest, v.frames) for v in sr.videos]
    samples = extract_rest_samples(vids)
    r1 = analyze_resting(samples, *_small_rest_cfgs())
    r2 = analyze_resting(samples, *_small_rest_cfgs())
    for view in r1.views:
        assert np.array_equal(r1.views[view].embedding, r2.views[view].embedding)
        assert np.array_equal(r1.views[view].labels, r2.views[view].labels)
        assert r1.views[view].dispersion == r2.views[view].dispersion
