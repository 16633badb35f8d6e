"""Command line entry point.

    pointrectify run --video frames/manifest.json --tracks tracks.json [--gt gt.json] --out out/
    pointrectify batch dataset/ --out out/ [--jobs 4]
    pointrectify detect --video frames/manifest.json
    pointrectify evaluate --pred corrected.json --gt gt.json
    pointrectify synth --out dataset/ --static 5 --pan 5

Exit codes: 0 success, 2 input error, 3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .background import BgConfig
from .camera_motion import CameraMotionConfig, detect
from .errors import InputError, InvariantError
from .metrics import AJConfig
from .pipeline import PipelineConfig, evaluate_files, run_batch, run_pipeline
from .rectify import RectifyMode
from .synthgen import DegradationSpec, degrade, random_scene_spec, render, write_scene
from .video_io import load_frames

EXIT_INPUT = 2
EXIT_INVARIANT = 3


def _add_detector_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("camera motion")
    g.add_argument("--lambda1", type=float, default=0.5, help="frame SSIM threshold (default 0.5)")
    g.add_argument("--lambda2", type=float, default=0.46, help="clip mean SSIM threshold (default 0.46)")
    g.add_argument("--eta", type=float, default=0.5, help="dissimilar-frame ratio threshold (default 0.5)")
    g.add_argument("--clip-seconds", type=float, default=5.0)


def _add_pipeline_args(p: argparse.ArgumentParser) -> None:
    _add_detector_args(p)
    g = p.add_argument_group("correction")
    g.add_argument("--mode", choices=[m.value for m in RectifyMode], default=RectifyMode.CMR_TEMPORARY.value)
    g.add_argument("--min-area", type=int, default=9, help="smallest region kept, in pixels")
    g.add_argument("--bg-history", type=int, default=500, help="background model history (frames)")
    g.add_argument("--group-split", choices=["metadata", "detector"], default="metadata",
                   help="source of static/moving labels for group AJ")
    g.add_argument("--query-mode", choices=["strided", "first"], default="strided")
    g.add_argument("--exclude-query-frame", action="store_true",
                   help="leave the query frame itself out of the metric")
    o = p.add_argument_group("outputs")
    o.add_argument("--dump-masks", action="store_true")
    o.add_argument("--dump-regions", action="store_true")
    o.add_argument("--dump-overlays", action="store_true")
    o.add_argument("--figures", action="store_true", help="render PNG report figures")


def _camera_config(args) -> CameraMotionConfig:
    return CameraMotionConfig(args.lambda1, args.lambda2, args.eta, args.clip_seconds)


def _aj_config(args) -> AJConfig:
    return AJConfig(query_mode=getattr(args, "query_mode", "strided"),
                    include_query_frame=not getattr(args, "exclude_query_frame", False))


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        camera=_camera_config(args),
        background=BgConfig(history=args.bg_history),
        min_area=args.min_area,
        mode=RectifyMode(args.mode),
        aj=_aj_config(args),
        group_split=args.group_split,
        dump_masks=args.dump_masks,
        dump_regions=args.dump_regions,
        dump_overlays=args.dump_overlays,
        figures=args.figures,
    )


def _print(doc) -> None:
    print(json.dumps(doc, indent=1))


def cmd_run(args) -> int:
    report = run_pipeline(_pipeline_config(args), args.video, args.tracks, args.out, args.gt)
    summary = {"video_id": report["video_id"], "camera": report["camera_motion"]["verdict"],
               "points_changed": report["rectification"]["points_changed"]}
    if "metrics" in report:
        summary["aj_input"] = report["metrics"]["input"]["aj"]
        summary["aj_output"] = report["metrics"]["output"]["aj"]
    _print(summary)
    return 0


def cmd_batch(args) -> int:
    doc = run_batch(_pipeline_config(args), args.dataset, args.out, args.jobs)
    summary = {"videos": len(doc["videos"])}
    if "metrics" in doc:
        for key in ("input", "output"):
            summary[key] = doc["metrics"][key]["group_aj"]
    _print(summary)
    return 0


def cmd_detect(args) -> int:
    video = load_frames(args.video)
    res = detect(video, _camera_config(args))
    _print({"video_id": video.video_id, **res.to_dict()})
    return 0


def cmd_evaluate(args) -> int:
    if len(args.pred) != len(args.gt):
        raise InputError("--pred and --gt must be given the same number of times")
    _print(evaluate_files(args.pred, args.gt, _aj_config(args)).to_dict())
    return 0


def cmd_synth(args) -> int:
    rng = np.random.default_rng(args.seed)
    kinds = ["static"] * args.static + ["pan"] * args.pan
    written = []
    for i, kind in enumerate(kinds):
        seed = args.seed * 1000 + i
        pan = (0.0, 0.0)
        if kind == "pan":
            angle = rng.uniform(0, 2 * np.pi)
            speed = rng.uniform(args.pan_speed, 2 * args.pan_speed)
            pan = (float(speed * np.cos(angle)), float(speed * np.sin(angle)))
        spec = random_scene_spec(seed, pan=pan, resolution=(args.size, args.size),
                                 num_frames=args.frames, fps=args.fps,
                                 video_id=f"{kind}{i:03d}")
        scene = render(spec)
        base = degrade(scene.gt, DegradationSpec(args.jitter, args.pseudo_follow, seed=seed), scene)
        write_scene(scene, f"{args.out}/{spec.video_id}", base)
        written.append(spec.video_id)
    _print({"written": written, "out": args.out})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pointrectify",
                                     description="Correct static-point trajectories in static-camera videos.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="process one video")
    p.add_argument("--video", required=True, help="frame manifest JSON")
    p.add_argument("--tracks", required=True, help="base-tracker trajectory JSON")
    p.add_argument("--gt", help="ground-truth trajectory JSON (enables metrics)")
    p.add_argument("--out", required=True, help="output directory")
    _add_pipeline_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="process every video directory under DATASET")
    p.add_argument("dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_pipeline_args(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("detect", help="camera motion verdict only")
    p.add_argument("--video", required=True)
    _add_detector_args(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="Average Jaccard of predictions against ground truth")
    p.add_argument("--pred", action="append", required=True)
    p.add_argument("--gt", action="append", required=True)
    p.add_argument("--query-mode", choices=["strided", "first"], default="strided")
    p.add_argument("--exclude-query-frame", action="store_true")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="write synthetic videos with ground truth and degraded tracks")
    p.add_argument("--out", required=True)
    p.add_argument("--static", type=int, default=1, help="number of static-camera scenes")
    p.add_argument("--pan", type=int, default=0, help="number of panning scenes")
    p.add_argument("--pan-speed", type=float, default=1.0, help="minimum pan speed, px/frame")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--fps", type=float, default=10.0)
    p.add_argument("--jitter", type=float, default=2.0)
    p.add_argument("--pseudo-follow", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
