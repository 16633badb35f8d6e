"""End-to-end processing of one video, and of a directory of videos.

Order of work for a video: camera-motion detection, then (static camera
only) background subtraction, region extraction and trajectory correction,
then scoring when ground truth is supplied.  Outputs per video::

    <out>/corrected.json   corrected trajectories (same schema as the input)
    <out>/report.json      camera-motion verdict, effective config, metrics
    <out>/frames.csv       per-frame SSIM / mask / region statistics
    <out>/masks/*.png      optional, --dump-masks
    <out>/regions.json     optional, --dump-regions
    <out>/overlays/*.png   optional, --dump-overlays
    <out>/figures/*.png    optional, --figures
"""
from __future__ import annotations

import csv
import json
import logging
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .background import BgConfig, foreground_masks
from .camera_motion import CameraMotionConfig, CameraMotionResult, detect
from .errors import InputError, InvariantError
from .metrics import AJConfig, AJResult, average_jaccard
from .rectify import RectifyMode, membership_matrix, rectify_video
from .region import ConfidentMovingRegion, regions_for_video
from .tracks import TrackSet, load_trajectories, save_trajectories
from .video_io import VideoSequence, load_frames

log = logging.getLogger(__name__)

REPORT_SCHEMA = 1


@dataclass(frozen=True)
class PipelineConfig:
    camera: CameraMotionConfig = CameraMotionConfig()
    background: BgConfig = BgConfig()
    min_area: int = 9
    mode: RectifyMode = RectifyMode.CMR_TEMPORARY
    aj: AJConfig = AJConfig()
    group_split: str = "metadata"  # or "detector"
    dump_masks: bool = False
    dump_regions: bool = False
    dump_overlays: bool = False
    figures: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", RectifyMode(self.mode))
        if self.group_split not in ("metadata", "detector"):
            raise ValueError(f"group_split must be 'metadata' or 'detector', got {self.group_split!r}")
        if self.min_area < 1:
            raise ValueError("min_area must be >= 1")

    def to_dict(self) -> dict:
        return {
            "camera_motion": self.camera.to_dict(),
            "background": self.background.to_dict(),
            "min_area": self.min_area,
            "mode": self.mode.value,
            "metrics": self.aj.to_dict(),
            "group_split": self.group_split,
            "dump_masks": self.dump_masks,
            "dump_regions": self.dump_regions,
            "dump_overlays": self.dump_overlays,
            "figures": self.figures,
        }


@dataclass
class VideoResult:
    video_id: str
    motion: CameraMotionResult
    base: TrackSet
    corrected: TrackSet
    regions: list[ConfidentMovingRegion] | None
    masks: np.ndarray | None
    camera_label: int | None  # label used for group splits
    scale: tuple[float, float] = (1.0, 1.0)  # trajectory -> video pixel coordinates
    report: dict = field(default_factory=dict)


def _scale_to_video(tracks: TrackSet, video: VideoSequence) -> tuple[float, float]:
    w, h = tracks.resolution
    return video.width / w, video.height / h


def process_video(video: VideoSequence, base: TrackSet, config: PipelineConfig,
                  gt: TrackSet | None = None) -> VideoResult:
    """Run detection and correction on in-memory data.  No files are touched."""
    if base.num_frames != video.num_frames:
        raise InputError(f"trajectories cover {base.num_frames} frames, video has {video.num_frames}")
    if gt is not None and (gt.num_frames != video.num_frames or len(gt) != len(base)):
        raise InputError(f"ground truth has {len(gt)} points x {gt.num_frames} frames, "
                         f"predictions {len(base)} x {base.num_frames}")

    motion = detect(video, config.camera)
    static = motion.is_static
    wants_regions = config.mode in (RectifyMode.CMR_GLOBAL, RectifyMode.CMR_TEMPORARY) or \
        config.dump_masks or config.dump_regions or config.dump_overlays or config.figures

    masks = regions = None
    if static and wants_regions:
        masks = foreground_masks(video.frames, config.background)
        regions = regions_for_video(masks, config.min_area)

    scale = _scale_to_video(base, video)
    corrected = base.replace(rectify_video(base.trajectories, motion.final_label, regions,
                                           config.mode, scale))

    _check_rectified(base, corrected, motion, config.mode)

    if config.group_split == "detector":
        label = motion.final_label
    else:
        label = video.metadata.get("camera_label")
        label = None if label is None else int(label)

    result = VideoResult(video.video_id, motion, base, corrected, regions, masks, label, scale)
    result.report = _report(result, config, gt, video)
    return result


def _check_rectified(base: TrackSet, corrected: TrackSet, motion: CameraMotionResult,
                     mode: RectifyMode) -> None:
    if len(base) != len(corrected):
        raise InvariantError("rectification changed the number of trajectories")
    for b, c in zip(base, corrected):
        if c.num_frames != b.num_frames or not np.array_equal(b.visible, c.visible):
            raise InvariantError("rectification altered frame count or visibility flags")
        if (motion.final_label or mode is RectifyMode.PASSTHROUGH) and b != c:
            raise InvariantError("trajectory modified although no correction applies")


def _report(res: VideoResult, config: PipelineConfig, gt: TrackSet | None,
            video: VideoSequence) -> dict:
    moved = [not np.array_equal(b.xy, c.xy) for b, c in zip(res.base, res.corrected)]
    frames_changed = sum(int(np.any(b.xy != c.xy, axis=1).sum()) for b, c in zip(res.base, res.corrected))
    report = {
        "schema": REPORT_SCHEMA,
        "video_id": res.video_id,
        "num_frames": video.num_frames,
        "resolution": [video.width, video.height],
        "fps": video.fps,
        "config": config.to_dict(),
        "camera_motion": res.motion.to_dict(),
        "regions": None if res.regions is None else {
            "frames_with_regions": sum(1 for r in res.regions if len(r)),
            "total_polygons": sum(len(r) for r in res.regions),
            "total_mask_area": sum(r.source_mask_area for r in res.regions),
        },
        "rectification": {
            "mode": config.mode.value,
            "applied": bool(res.motion.is_static and config.mode is not RectifyMode.PASSTHROUGH),
            "num_points": len(res.base),
            "points_changed": int(sum(moved)),
            "positions_changed": frames_changed,
        },
        "camera_label": res.camera_label,
        "group_split": config.group_split,
    }
    if gt is not None:
        vid = gt.video_id
        labels = None if res.camera_label is None else {vid: res.camera_label}
        report["metrics"] = {
            "input": average_jaccard({vid: res.base}, {vid: gt}, config.aj, labels).to_dict(),
            "output": average_jaccard({vid: res.corrected}, {vid: gt}, config.aj, labels).to_dict(),
        }
    return report


def _dump_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")


def _write_frame_table(path: Path, res: VideoResult) -> None:
    clip_of = np.zeros(len(res.motion.reference_ssim), dtype=int)
    for k, start in enumerate(res.motion.clip_starts):
        clip_of[start:] = k
    inside = None
    if res.regions is not None and len(res.base):
        inside = membership_matrix(res.base.positions() * np.asarray(res.scale), res.regions)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "reference_ssim", "clip", "mask_area", "regions", "points_in_region"])
        for t, score in enumerate(res.motion.reference_ssim):
            row = [t, repr(float(score)), int(clip_of[t])]
            if res.regions is None:
                row += ["", "", ""]
            else:
                row += [res.regions[t].source_mask_area, len(res.regions[t]),
                        "" if inside is None else int(inside[:, t].sum())]
            writer.writerow(row)


def write_outputs(res: VideoResult, config: PipelineConfig, out_dir: str | Path,
                  tracks_path: str | Path | None = None,
                  video: VideoSequence | None = None) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"corrected": out / "corrected.json", "report": out / "report.json",
             "frames": out / "frames.csv"}

    unchanged = res.base == res.corrected
    if unchanged and tracks_path is not None:
        # nothing corrected: hand the base tracker's file through untouched
        shutil.copyfile(tracks_path, paths["corrected"])
    else:
        save_trajectories(paths["corrected"], res.corrected)
    _dump_json(paths["report"], res.report)
    _write_frame_table(paths["frames"], res)

    if config.dump_masks and res.masks is not None:
        mdir = out / "masks"
        mdir.mkdir(exist_ok=True)
        for t, m in enumerate(res.masks):
            Image.fromarray(m.astype(np.uint8) * 255).convert("1").save(mdir / f"{t:05d}.png")
        paths["masks"] = mdir
    if config.dump_regions and res.regions is not None:
        paths["regions"] = out / "regions.json"
        _dump_json(paths["regions"], [r.to_dict() for r in res.regions])
    if (config.dump_overlays or config.figures) and video is not None:
        from . import plots

        if config.dump_overlays:
            paths["overlays"] = plots.dump_overlays(video, res.base, res.corrected, res.regions,
                                                    out / "overlays", res.scale)
        if config.figures:
            paths["figures"] = plots.render_video_figures(video, res, config, out / "figures")
    return paths


def run_pipeline(config: PipelineConfig, video_manifest: str | Path, base_trajectory_file: str | Path,
                 out_dir: str | Path, gt_file: str | Path | None = None) -> dict:
    """Process one video from files; returns the report that was written."""
    video = load_frames(video_manifest)
    base = load_trajectories(base_trajectory_file)
    gt = load_trajectories(gt_file) if gt_file is not None else None
    res = process_video(video, base, config, gt)
    write_outputs(res, config, out_dir, base_trajectory_file, video)
    log.info("%s: %s camera, %d/%d points corrected", res.video_id,
             res.report["camera_motion"]["verdict"], res.report["rectification"]["points_changed"],
             len(base))
    return res.report


def find_videos(dataset_dir: str | Path) -> list[dict[str, Path]]:
    """Subdirectories holding a manifest plus ``tracks.json`` (and maybe ``gt.json``)."""
    if not Path(dataset_dir).is_dir():
        raise InputError(f"dataset directory not found: {dataset_dir}")
    entries = []
    for sub in sorted(p for p in Path(dataset_dir).iterdir() if p.is_dir()):
        manifest = next((m for m in (sub / "manifest.json", sub / "frames" / "manifest.json")
                         if m.exists()), None)
        tracks = sub / "tracks.json"
        if manifest is None or not tracks.exists():
            continue
        entry = {"name": sub.name, "manifest": manifest, "tracks": tracks}
        if (sub / "gt.json").exists():
            entry["gt"] = sub / "gt.json"
        entries.append(entry)
    if not entries:
        raise InputError(f"no videos found under {dataset_dir}")
    return entries


def _run_entry(args) -> tuple[str, dict, TrackSet, TrackSet | None, int | None]:
    config, entry, out_dir = args
    video = load_frames(entry["manifest"])
    base = load_trajectories(entry["tracks"])
    gt = load_trajectories(entry["gt"]) if "gt" in entry else None
    res = process_video(video, base, config, gt)
    write_outputs(res, config, Path(out_dir) / entry["name"], entry["tracks"], video)
    return res.video_id, res.report, res.corrected, gt, res.camera_label


def run_batch(config: PipelineConfig, dataset_dir: str | Path, out_dir: str | Path,
              jobs: int = 1) -> dict:
    """Process every video under ``dataset_dir`` and write a dataset-level report."""
    entries = find_videos(dataset_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(config, e, out) for e in entries]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_entry, tasks))
    else:
        results = [_run_entry(t) for t in tasks]

    ids = [r[0] for r in results]
    if len(set(ids)) != len(ids):
        raise InputError("duplicate video ids in dataset")
    doc = {
        "schema": REPORT_SCHEMA,
        "config": config.to_dict(),
        "videos": {vid: {"camera_motion": rep["camera_motion"], "rectification": rep["rectification"],
                         "camera_label": rep["camera_label"]}
                   for vid, rep, *_ in results},
    }
    scored = [r for r in results if r[3] is not None]
    if scored:
        labels = {vid: lab for vid, _, _, _, lab in scored if lab is not None}
        gts = {vid: gt for vid, _, _, gt, _ in scored}
        base = {vid: load_trajectories(e["tracks"]) for (vid, *_), e in zip(results, entries)
                if vid in gts}
        corrected = {vid: c for vid, _, c, gt, _ in scored}
        doc["metrics"] = {
            "input": average_jaccard(base, gts, config.aj, labels).to_dict(),
            "output": average_jaccard(corrected, gts, config.aj, labels).to_dict(),
        }
    _dump_json(out / "dataset_report.json", doc)
    if config.figures and scored:
        from . import plots

        plots.render_dataset_figures(doc, out / "figures")
    return doc


def evaluate_files(pred_files: Sequence[str | Path], gt_files: Sequence[str | Path],
                   cfg: AJConfig = AJConfig()) -> AJResult:
    preds = {}
    gts = {}
    for p, g in zip(pred_files, gt_files):
        pred = load_trajectories(p)
        gt = load_trajectories(g)
        preds[gt.video_id] = pred
        gts[gt.video_id] = gt
    return average_jaccard(preds, gts, cfg)
