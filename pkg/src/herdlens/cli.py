"""Command-line entry point: validate, synth, analyze, report show."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import graze as graze_mod
from . import rest as rest_mod
from . import synth as synth_mod
from .cluster import ClusterConfig
from .embed import EmbeddingConfig
from .errors import HerdlensError
from .errors import TooFewFeatures
from .gait import MIN_CONF_DEFAULT, MIN_VISIBLE_DEFAULT, analyze_running
from .interchange import read_video
from .report import (new_report, read_report, render_scatter, render_series,
                     write_csv, write_report)
from .speed import NORM_EXPONENT_DEFAULT, analyze_speed


def _seed_default() -> int:
    return int(os.environ.get("HERDLENS_SEED", "0"))


def find_video_dirs(root: Path) -> list[Path]:
    """A video dir holds manifest.json + frames.jsonl; accept root or children."""
    if (root / "manifest.json").is_file() and (root / "frames.jsonl").is_file():
        return [root]
    return sorted(
        d for d in root.iterdir()
        if d.is_dir() and (d / "manifest.json").is_file()
        and (d / "frames.jsonl").is_file()
    ) if root.is_dir() else []


def load_videos(root: Path):
    videos = []
    issues = []
    for vdir in find_video_dirs(root):
        manifest, frames, vissues = read_video(vdir / "manifest.json",
                                               vdir / "frames.jsonl")
        issues.extend((vdir, i) for i in vissues)
        if manifest is not None:
            videos.append((manifest, frames, vdir))
    return videos, issues


def cmd_validate(args) -> int:
    any_issue = False
    for path in args.paths:
        root = Path(path)
        vdirs = find_video_dirs(root)
        if not vdirs:
            print(f"{path}: no manifest.json/frames.jsonl pairs found")
            any_issue = True
            continue
        for vdir in vdirs:
            _, frames, issues = read_video(vdir / "manifest.json",
                                           vdir / "frames.jsonl")
            for issue in issues:
                print(f"{vdir / 'frames.jsonl'}: {issue}")
            if issues:
                any_issue = True
            else:
                print(f"{vdir}: OK ({len(frames)} frames)")
    return 1 if any_issue else 0


def cmd_synth(args) -> int:
    seed = args.seed
    if args.scenario == "motion":
        result = synth_mod.gen_motion(seed=seed, v=(args.vx, args.vy),
                                      n_frames=args.n_frames, fps=args.fps,
                                      frame_stride=args.frame_stride)
    elif args.scenario == "blobs":
        result = synth_mod.gen_blobs(seed=seed, k=args.k, n_per=args.n_per,
                                     d=args.dims, sigma=args.sigma, sep=args.sep)
    elif args.scenario == "grazing":
        result = synth_mod.gen_grazing(seed=seed)
    elif args.scenario == "resting":
        result = synth_mod.gen_resting(seed=seed)
    else:
        result = synth_mod.gen_gait(seed=seed, n_animals=args.n_animals,
                                    frames_per_animal=args.frames_per_animal,
                                    noise=args.noise)
    written = synth_mod.write_synth(result, args.out)
    for path in written:
        print(path)
    return 0


def _embed_cfg(args, n_neighbors_default: int, min_dist_default: float) -> EmbeddingConfig:
    return EmbeddingConfig(
        n_neighbors=args.n_neighbors if args.n_neighbors else n_neighbors_default,
        min_dist=args.min_dist if args.min_dist is not None else min_dist_default,
        n_epochs=args.n_epochs, seed=args.seed)


def _analyze_run(args, out: Path, report: dict) -> None:
    videos, _ = load_videos(Path(args.input))
    running = [(m, fr) for m, fr, _ in videos if m.activity == "running"]
    if not running:
        raise HerdlensError(f"no running videos under {args.input}")
    embed_cfg = _embed_cfg(args, n_neighbors_default=20, min_dist_default=0.1)
    cluster_cfg = ClusterConfig(k=args.kmeans_k, seed=args.seed)
    try:
        gait_report = analyze_running(running, embed_cfg, cluster_cfg)
    except TooFewFeatures as exc:
        gait_report = None
        report["warnings"].append(f"gait skipped: {exc}")
    if gait_report is not None:
        _write_gait_section(gait_report, cluster_cfg, out, report)

    report["speed"] = {}
    for m, fr in running:
        try:
            profile = analyze_speed(m, fr, norm_exponent=args.norm_exponent)
        except HerdlensError:
            continue  # pose-only videos carry no masks to track
        report["speed"][m.video_id] = {
            "a_ref": profile.a_ref,
            "norm_exponent": profile.norm_exponent,
            "terciles": dict(zip(("commencement", "midpoint", "conclusion"),
                                 profile.terciles)),
            "raw": profile.raw.tolist(),
            "normalized": profile.normalized.tolist(),
        }
        write_csv(out / "series" / f"speed_{m.video_id}.csv",
                  ["video_id", "step_index", "t_seconds", "raw_px_per_s", "normalized"],
                  [(m.video_id, i, float(t), float(r), float(nv))
                   for i, (t, r, nv) in enumerate(
                       zip(profile.t_seconds, profile.raw, profile.normalized))])
        n = profile.normalized.size
        render_series({"normalized": profile.normalized, "raw": profile.raw},
                      out / "plots" / f"speed_{m.video_id}.svg",
                      title=f"speed {m.video_id}",
                      tercile_boundaries=[n // 3, 2 * (n // 3)])
    if not report["speed"]:
        del report["speed"]  # absent, not null-filled
        if gait_report is None:
            raise HerdlensError("running videos yielded neither gait features nor tracks")


def _write_gait_section(gait_report, cluster_cfg, out: Path, report: dict) -> None:
    report["warnings"].extend(gait_report.warnings)
    report["gait"] = {
        "per_animal": {
            animal: {
                "histogram": stats.histogram.tolist(),
                "dominant_cluster": stats.dominant_cluster,
                "dominance_ratio": stats.dominance_ratio,
                "occupied_clusters": stats.occupied_clusters,
                "n_features": stats.n_features,
            } for animal, stats in gait_report.per_animal.items()
        },
        "n_features": len(gait_report.features),
        "k": cluster_cfg.k,
    }
    write_csv(out / "embeddings" / "gait.csv", ["point_id", "x", "y"],
              [(i, float(x), float(y))
               for i, (x, y) in enumerate(gait_report.embedding)])
    render_scatter(gait_report.embedding,
                   [f.animal_id for f in gait_report.features],
                   out / "plots" / "gait_animals.svg", title="gait by animal")
    render_scatter(gait_report.embedding, gait_report.labels.tolist(),
                   out / "plots" / "gait_clusters.svg", title="gait clusters")


def _analyze_graze(args, out: Path, report: dict) -> None:
    videos, _ = load_videos(Path(args.input))
    grazing = []
    for m, fr, vdir in videos:
        if m.activity != "grazing":
            continue
        imagery = graze_mod.load_imagery_index(vdir / "imagery_index.json")
        grazing.append((m, fr, imagery))
    if not grazing:
        raise HerdlensError(f"no grazing videos under {args.input}")
    graze_report = graze_mod.analyze_grazing(
        grazing, seed=args.seed, side_factor=args.side_factor)
    report["graze"] = {
        "videos": {
            r.video_id: {
                "social": r.social,
                "activity_index": r.activity_index,
                "scores": r.scores.tolist(),
                "deltas": r.deltas.tolist(),
                "skipped_frames": r.skipped_frames,
            } for r in graze_report.videos
        },
        "groups": {
            social: {"mean": g.mean, "ci_low": g.ci_low, "ci_high": g.ci_high,
                     "n_videos": g.n_videos}
            for social, g in graze_report.groups.items()
        },
        "score_kind": graze_report.score_kind,
        "patch_side_factor": graze_report.patch_side_factor,
    }
    for r in graze_report.videos:
        write_csv(out / "series" / f"graze_{r.video_id}.csv",
                  ["video_id", "sample_index", "green_score"],
                  [(r.video_id, i, float(s)) for i, s in enumerate(r.scores)])
    render_series({r.video_id: r.scores for r in graze_report.videos},
                  out / "plots" / "grazing.svg", title="grazing activity")


def _analyze_rest(args, out: Path, report: dict) -> None:
    videos, _ = load_videos(Path(args.input))
    sitting = [(m, fr) for m, fr, _ in videos if m.activity == "sitting"]
    if not sitting:
        raise HerdlensError(f"no sitting videos under {args.input}")
    samples = rest_mod.extract_rest_samples(sitting)
    embed_cfg = _embed_cfg(args, n_neighbors_default=50, min_dist_default=0.01)
    cluster_cfg = ClusterConfig(k=args.kmeans_k, seed=args.seed)
    rest_report = rest_mod.analyze_resting(samples, embed_cfg, cluster_cfg)
    report["rest"] = {}
    for view, vr in rest_report.views.items():
        report["warnings"].extend(vr.warnings)
        report["rest"][view] = {
            "dispersion": vr.dispersion,
            "herd_single_ratio": vr.herd_single_ratio,
            "n_samples": int(vr.sample_indices.size),
        }
        write_csv(out / "embeddings" / f"rest_{view}.csv", ["point_id", "x", "y"],
                  [(i, float(x), float(y)) for i, (x, y) in enumerate(vr.embedding)])
        render_scatter(vr.embedding,
                       [samples[i].social for i in vr.sample_indices],
                       out / "plots" / f"rest_{view}.svg",
                       title=f"resting {view} view")


def cmd_analyze(args) -> int:
    out = Path(args.out)
    for sub in ("embeddings", "plots", "series"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    config_echo = {
        "kind": args.kind,
        "input": str(args.input),
        "seed": args.seed,
        "n_neighbors": args.n_neighbors,
        "min_dist": args.min_dist,
        "n_epochs": args.n_epochs,
        "kmeans_k": args.kmeans_k,
        "frame_stride": args.frame_stride,
        "norm_exponent": args.norm_exponent,
        "side_factor": args.side_factor,
        "min_conf": MIN_CONF_DEFAULT,
        "min_visible": MIN_VISIBLE_DEFAULT,
        "standard_rest_dim": rest_mod.STANDARD_DIM,
        "nose_index": graze_mod.NOSE_INDEX_DEFAULT,
    }
    report = new_report(config_echo)
    try:
        if args.kind == "run":
            _analyze_run(args, out, report)
        elif args.kind == "graze":
            _analyze_graze(args, out, report)
        else:
            _analyze_rest(args, out, report)
    except HerdlensError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    write_report(report, out / "report.json")
    print(out / "report.json")
    return 0


def cmd_report_show(args) -> int:
    report = read_report(args.path)
    print(f"schema_version: {report.get('schema_version')}")
    for section in ("gait", "speed", "graze", "rest"):
        if section in report:
            print(f"{section}: {json.dumps(report[section], sort_keys=True)[:200]}")
    for warning in report.get("warnings", []):
        print(f"warning: {warning}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herdlens")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check interchange files")
    p_val.add_argument("paths", nargs="+")
    p_val.set_defaults(func=cmd_validate)

    p_synth = sub.add_parser("synth", help="generate synthetic datasets")
    p_synth.add_argument("scenario", choices=synth_mod.SCENARIOS)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--seed", type=int, default=_seed_default())
    p_synth.add_argument("--vx", type=float, default=3.0)
    p_synth.add_argument("--vy", type=float, default=4.0)
    p_synth.add_argument("--n-frames", type=int, default=30)
    p_synth.add_argument("--fps", type=float, default=30.0)
    p_synth.add_argument("--frame-stride", type=int, default=10)
    p_synth.add_argument("--k", type=int, default=3)
    p_synth.add_argument("--n-per", type=int, default=100)
    p_synth.add_argument("--dims", type=int, default=34)
    p_synth.add_argument("--sigma", type=float, default=0.1)
    p_synth.add_argument("--sep", type=float, default=5.0)
    p_synth.add_argument("--n-animals", type=int, default=10)
    p_synth.add_argument("--frames-per-animal", type=int, default=60)
    p_synth.add_argument("--noise", type=float, default=0.005)
    p_synth.set_defaults(func=cmd_synth)

    p_an = sub.add_parser("analyze", help="run an analysis")
    p_an.add_argument("kind", choices=("run", "graze", "rest"))
    p_an.add_argument("--input", required=True)
    p_an.add_argument("--out", required=True)
    p_an.add_argument("--seed", type=int, default=_seed_default())
    p_an.add_argument("--n-neighbors", type=int, default=None)
    p_an.add_argument("--min-dist", type=float, default=None)
    p_an.add_argument("--n-epochs", type=int, default=None)
    p_an.add_argument("--kmeans-k", type=int, default=10)
    p_an.add_argument("--frame-stride", type=int, default=10)
    p_an.add_argument("--norm-exponent", type=float, default=NORM_EXPONENT_DEFAULT)
    p_an.add_argument("--side-factor", type=float,
                      default=graze_mod.PATCH_SIDE_FACTOR)
    p_an.set_defaults(func=cmd_analyze)

    p_rep = sub.add_parser("report", help="inspect a report")
    rep_sub = p_rep.add_subparsers(dest="report_command", required=True)
    p_show = rep_sub.add_parser("show")
    p_show.add_argument("path")
    p_show.set_defaults(func=cmd_report_show)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HerdlensError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
