"""Report figures and per-frame overlay images."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from PIL import Image, ImageDraw  # noqa: E402

RC = {
    "figure.dpi": 100,
    "savefig.dpi": 120,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "pointrectify",
}

BASE_COLOR = "#d62728"
FIXED_COLOR = "#2ca02c"


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_camera_motion(motion, cfg, path: Path) -> Path:
    """Reference SSIM per frame with the clip means and both thresholds."""
    scores = np.asarray(motion.reference_ssim)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6.4, 3.2))
        ax.plot(np.arange(len(scores)), scores, lw=1.0, color="0.25", label="SSIM vs frame 0")
        ax.axhline(cfg.lambda1, color="#1f77b4", ls="--", lw=0.8, label=f"lambda1 = {cfg.lambda1:g}")
        ax.axhline(cfg.lambda2, color="#ff7f0e", ls=":", lw=0.8, label=f"lambda2 = {cfg.lambda2:g}")
        ends = list(motion.clip_starts[1:]) + [len(scores)]
        for start, end, mean in zip(motion.clip_starts, ends, motion.clip_mean_ssim):
            ax.axvline(start, color="0.8", lw=0.6)
            if mean is not None:
                ax.hlines(mean, start, end - 1, color="#ff7f0e", lw=2.0)
        verdict = "static" if motion.is_static else "moving"
        ax.set_title(f"camera: {verdict}  (dissimilar ratio {motion.dissimilar_ratio:.2f})")
        ax.set_xlabel("frame")
        ax.set_ylabel("SSIM")
        ax.set_ylim(min(-0.05, scores.min() - 0.05), 1.05)
        ax.legend(loc="lower left", frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def plot_tracks(background: np.ndarray, base, corrected, path: Path,
                scale: tuple[float, float] = (1.0, 1.0), max_points: int = 200) -> Path:
    """Base vs. corrected trajectories drawn over a still frame."""
    sx, sy = scale
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 2, figsize=(7.2, 3.8), sharex=True, sharey=True)
        for ax, tracks, color, title in ((axes[0], base, BASE_COLOR, "base tracker"),
                                         (axes[1], corrected, FIXED_COLOR, "corrected")):
            ax.imshow(background, cmap="gray", vmin=0, vmax=255)
            for traj in list(tracks)[:max_points]:
                ax.plot(traj.xy[:, 0] * sx, traj.xy[:, 1] * sy, color=color, lw=0.6, alpha=0.8)
                ax.plot(traj.query.x * sx, traj.query.y * sy, "o", ms=2, color="w", mec="k", mew=0.3)
            ax.set_title(title)
            ax.set_axis_off()
        fig.tight_layout()
        return _save(fig, path)


def plot_jaccard(metrics: dict, thresholds: Sequence[float], path: Path) -> Path:
    """Per-threshold Jaccard before and after correction."""
    x = np.arange(len(thresholds))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.8, 3.0))
        ax.bar(x - 0.2, metrics["input"]["per_threshold_jaccard"], 0.4, color=BASE_COLOR,
               label=f"input  AJ {100 * metrics['input']['aj']:.2f}")
        ax.bar(x + 0.2, metrics["output"]["per_threshold_jaccard"], 0.4, color=FIXED_COLOR,
               label=f"output AJ {100 * metrics['output']['aj']:.2f}")
        ax.set_xticks(x, [f"{t:g}" for t in thresholds])
        ax.set_xlabel("threshold (px)")
        ax.set_ylabel("Jaccard")
        ax.set_ylim(0, 1)
        ax.legend(frameon=False, loc="upper left")
        fig.tight_layout()
        return _save(fig, path)


def plot_group_aj(metrics: dict, path: Path) -> Path:
    groups = ["static", "moving", "all"]
    x = np.arange(len(groups))

    def vals(key):
        return [np.nan if metrics[key]["group_aj"][g] is None else 100 * metrics[key]["group_aj"][g]
                for g in groups]

    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        ax.bar(x - 0.2, vals("input"), 0.4, color=BASE_COLOR, label="input")
        ax.bar(x + 0.2, vals("output"), 0.4, color=FIXED_COLOR, label="output")
        ax.set_xticks(x, groups)
        ax.set_ylabel("AJ")
        ax.set_ylim(0, 100)
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def render_video_figures(video, res, config, directory: Path) -> Path:
    directory = Path(directory)
    plot_camera_motion(res.motion, config.camera, directory / "camera_motion.png")
    still = np.median(video.frames, axis=0)
    plot_tracks(still, res.base, res.corrected, directory / "tracks.png", res.scale)
    if "metrics" in res.report:
        plot_jaccard(res.report["metrics"], config.aj.thresholds, directory / "jaccard.png")
    return directory


def render_dataset_figures(doc: dict, directory: Path) -> Path:
    directory = Path(directory)
    metrics = doc["metrics"]
    plot_group_aj(metrics, directory / "group_aj.png")
    plot_jaccard(metrics, doc["config"]["metrics"]["thresholds"], directory / "jaccard.png")
    return directory


def dump_overlays(video, base, corrected, regions, directory: Path,
                  scale: tuple[float, float] = (1.0, 1.0)) -> Path:
    """One RGB PNG per frame: region outlines, base (red) and corrected (green) points."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    sx, sy = scale
    for t, frame in enumerate(video.frames):
        img = Image.fromarray(frame, mode="L").convert("RGB")
        draw = ImageDraw.Draw(img)
        if regions is not None:
            for poly in regions[t].polygons:
                draw.polygon([(float(x), float(y)) for x, y in poly], outline=(255, 200, 0))
        for tracks, color in ((base, (214, 39, 40)), (corrected, (44, 160, 44))):
            for traj in tracks:
                if not traj.visible[t]:
                    continue
                x, y = traj.xy[t, 0] * sx, traj.xy[t, 1] * sy
                draw.ellipse([x - 1.5, y - 1.5, x + 1.5, y + 1.5], outline=color)
        img.save(directory / f"{t:05d}.png")
    return directory
