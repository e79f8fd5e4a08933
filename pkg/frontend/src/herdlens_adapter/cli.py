from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import (DEFAULT_PROMPT, DEFAULT_SCORE_THRESHOLD, DEFAULT_STRIDE,
                     AdapterConfig)
from .errors import AdapterError
from .export import export_imagery, export_video
from .models import load_backend


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herdlens-adapter")
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("export", help="run perception, emit interchange files")
    p_exp.add_argument("--video", required=True,
                       help="directory of PPM frames in temporal order")
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--video-id", required=True)
    p_exp.add_argument("--fps", type=float, default=30.0)
    p_exp.add_argument("--activity", required=True,
                       choices=("grazing", "running", "sitting"))
    p_exp.add_argument("--view", choices=("front", "side"))
    p_exp.add_argument("--social", choices=("single", "herd"))
    p_exp.add_argument("--prompt", default=DEFAULT_PROMPT)
    p_exp.add_argument("--stride", type=int, default=DEFAULT_STRIDE)
    p_exp.add_argument("--threshold", type=float,
                       default=DEFAULT_SCORE_THRESHOLD)
    p_exp.add_argument("--backend", default="synthetic",
                       choices=("synthetic", "checkpoint"))
    p_exp.add_argument("--detector-checkpoint")
    p_exp.add_argument("--segmenter-checkpoint")
    p_exp.add_argument("--pose-checkpoint")
    p_exp.add_argument("--with-imagery", action="store_true",
                       help="also copy kept frames + index for graze analysis")
    p_exp.set_defaults(func=cmd_export)
    return parser


def cmd_export(args) -> int:
    checkpoints = {}
    for role, path in (("detector", args.detector_checkpoint),
                       ("segmenter", args.segmenter_checkpoint),
                       ("pose", args.pose_checkpoint)):
        if path:
            checkpoints[role] = Path(path)
    config = AdapterConfig(out_dir=Path(args.out), prompt=args.prompt,
                           score_threshold=args.threshold,
                           frame_stride=args.stride,
                           checkpoints=checkpoints)
    backend = load_backend(args.backend, config)
    manifest_fields = {"video_id": args.video_id, "fps": args.fps,
                       "activity": args.activity, "view": args.view,
                       "social": args.social}
    out = export_video(Path(args.video), manifest_fields, config, backend)
    if args.with_imagery:
        export_imagery(Path(args.video), out, args.stride)
    print(out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdapterError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
