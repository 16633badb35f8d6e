"""Static vs. moving camera classification from frame-to-reference SSIM.

Two granularities are combined:

* video level: the share of frames whose SSIM against the first frame falls
  below ``lambda1``; the video is provisionally "moving" when that share
  exceeds ``eta``;
* clip level: the video is cut into ``clip_seconds`` clips and each clip's
  mean SSIM against its own first frame is compared with ``lambda2``.

The final label is moving only if the video-level test fires *and* at least
one clip is dissimilar.  Label 0 is a static camera, 1 a moving one.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError
from .ssim import DEFAULT_PARAMS, SsimParams, ssim
from .video_io import Clip, VideoSequence, segment_clips

STATIC, MOVING = 0, 1


@dataclass(frozen=True)
class CameraMotionConfig:
    lambda1: float = 0.5
    lambda2: float = 0.46
    eta: float = 0.5
    clip_seconds: float = 5.0
    ssim: SsimParams = DEFAULT_PARAMS

    def __post_init__(self) -> None:
        for name in ("lambda1", "lambda2", "eta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.clip_seconds <= 0:
            raise ValueError("clip_seconds must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CameraMotionResult:
    coarse_label: int
    dissimilar_ratio: float
    clip_labels: list[int] = field(default_factory=list)
    clip_mean_ssim: list[float | None] = field(default_factory=list)
    clip_starts: list[int] = field(default_factory=list)
    final_label: int = STATIC
    # SSIM of every frame against frame 0; kept for reporting and plots
    reference_ssim: list[float] = field(default_factory=list)

    @property
    def is_static(self) -> bool:
        return self.final_label == STATIC

    def to_dict(self) -> dict:
        return {
            "coarse_label": self.coarse_label,
            "dissimilar_ratio": self.dissimilar_ratio,
            "clip_labels": list(self.clip_labels),
            "clip_mean_ssim": list(self.clip_mean_ssim),
            "clip_starts": list(self.clip_starts),
            "final_label": self.final_label,
            "verdict": "static" if self.is_static else "moving",
        }


def reference_similarities(frames: np.ndarray, p: SsimParams = DEFAULT_PARAMS) -> np.ndarray:
    """SSIM of each frame against the first one (entry 0 is exactly 1)."""
    ref = frames[0]
    return np.array([ssim(ref, f, p) for f in frames])


def combine_labels(coarse_label: int, clip_labels) -> int:
    return int(bool(coarse_label) and any(bool(c) for c in clip_labels))


def coarse_from_scores(scores, cfg: CameraMotionConfig = CameraMotionConfig()) -> tuple[int, float]:
    """Video-level label from SSIM-to-reference scores (reference term included)."""
    scores = np.asarray(scores, dtype=np.float64)
    ratio = float(np.count_nonzero(scores < cfg.lambda1)) / len(scores)
    return int(ratio > cfg.eta), ratio


def fine_from_scores(scores, cfg: CameraMotionConfig = CameraMotionConfig()) -> tuple[int, float]:
    """Clip-level label from the clip's SSIM-to-first-frame scores."""
    mean = float(np.mean(np.asarray(scores, dtype=np.float64)))
    return int(mean < cfg.lambda2), mean


def coarse_detect(video: VideoSequence | np.ndarray, cfg: CameraMotionConfig = CameraMotionConfig()
                  ) -> tuple[int, float]:
    frames = video.frames if isinstance(video, VideoSequence) else np.asarray(video)
    if len(frames) < 2:
        raise InputError("camera motion detection needs at least 2 frames")
    return coarse_from_scores(reference_similarities(frames, cfg.ssim), cfg)


def fine_detect_clip(clip: Clip | np.ndarray, cfg: CameraMotionConfig = CameraMotionConfig()
                     ) -> tuple[int, float]:
    frames = clip.frames if isinstance(clip, Clip) else np.asarray(clip)
    if len(frames) < 2:
        raise InputError("a clip needs at least 2 frames")
    return fine_from_scores(reference_similarities(frames, cfg.ssim), cfg)


def detect(video: VideoSequence, cfg: CameraMotionConfig = CameraMotionConfig()) -> CameraMotionResult:
    if video.num_frames < 2:
        raise InputError("camera motion detection needs at least 2 frames")
    scores = reference_similarities(video.frames, cfg.ssim)
    coarse, ratio = coarse_from_scores(scores, cfg)
    clips = segment_clips(video, cfg.clip_seconds)

    labels: list[int] = []
    means: list[float | None] = []
    for clip in clips:
        if not coarse:
            # the conjunction makes clip labels irrelevant
            labels.append(0)
            means.append(None)
        else:
            label, mean = fine_detect_clip(clip, cfg)
            labels.append(label)
            means.append(mean)

    return CameraMotionResult(
        coarse_label=coarse,
        dissimilar_ratio=ratio,
        clip_labels=labels,
        clip_mean_ssim=means,
        clip_starts=[c.start_frame for c in clips],
        final_label=combine_labels(coarse, labels),
        reference_ssim=[float(s) for s in scores],
    )
