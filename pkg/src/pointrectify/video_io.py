"""Frame-sequence loading, grayscale conversion and clip partitioning.

Videos are stored as a directory of still images plus a JSON manifest::

    {"video_id": "clip01", "fps": 30, "frames": ["000.png", "001.png", ...]}

Frame paths are resolved relative to the manifest's directory.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import InputError

MAX_SIDE = 256

_LUMA = np.array([0.299, 0.587, 0.114])


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Convert an (H, W, 3) 8-bit RGB array to (H, W) uint8 luma (BT.601).

    Rounds half up.  Arrays that are already 2-D are returned as uint8 unchanged.
    """
    rgb = np.asarray(rgb)
    if rgb.ndim == 2:
        return rgb.astype(np.uint8, copy=False)
    if rgb.ndim != 3 or rgb.shape[2] not in (3, 4):
        raise InputError(f"expected (H, W, 3) RGB array, got shape {rgb.shape}")
    y = rgb[..., :3].astype(np.float64) @ _LUMA
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class Clip:
    start_frame: int
    frames: np.ndarray  # (T', H, W) view into the parent stack

    def __len__(self) -> int:
        return int(self.frames.shape[0])


@dataclass
class VideoSequence:
    frames: np.ndarray  # (T, H, W) uint8
    fps: float
    video_id: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.frames = np.asarray(self.frames)
        if self.frames.ndim != 3:
            raise InputError(f"frame stack must be (T, H, W), got {self.frames.shape}")
        if self.frames.dtype != np.uint8:
            raise InputError(f"frames must be uint8, got {self.frames.dtype}")
        if not (self.fps > 0 and math.isfinite(self.fps)):
            raise InputError(f"fps must be positive, got {self.fps}")
        if self.width > MAX_SIDE or self.height > MAX_SIDE:
            raise InputError(
                f"frames are {self.width}x{self.height}; inputs must be pre-scaled to "
                f"at most {MAX_SIDE}x{MAX_SIDE}"
            )

    @property
    def num_frames(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    def __len__(self) -> int:
        return self.num_frames


def _read_image(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode in ("L", "1", "P", "I;16", "I"):
                im = im.convert("L")
                return np.asarray(im, dtype=np.uint8)
            return to_grayscale(np.asarray(im.convert("RGB")))
    except FileNotFoundError:
        raise InputError(f"missing frame file: {path}") from None
    except OSError as exc:
        raise InputError(f"cannot decode frame {path}: {exc}") from None


def load_manifest(manifest_path: str | Path) -> dict:
    path = Path(manifest_path)
    try:
        manifest = json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"missing manifest: {path}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"manifest {path} is not valid JSON: {exc}") from None
    if not isinstance(manifest, dict):
        raise InputError("manifest must be a JSON object")
    for key in ("fps", "frames"):
        if key not in manifest:
            raise InputError(f"manifest missing required key {key!r}")
    if not isinstance(manifest["frames"], list):
        raise InputError("manifest 'frames' must be a list of paths")
    return manifest


def load_frames(manifest_path: str | Path) -> VideoSequence:
    """Decode every frame listed in a manifest into a grayscale `VideoSequence`."""
    path = Path(manifest_path)
    manifest = load_manifest(path)
    fps = manifest["fps"]
    if not isinstance(fps, (int, float)) or isinstance(fps, bool) or not fps > 0:
        raise InputError(f"fps must be a positive number, got {fps!r}")
    names = manifest["frames"]
    if not names:
        raise InputError("no frames")

    frames = []
    for name in names:
        img = _read_image(path.parent / name)
        if frames and img.shape != frames[0].shape:
            raise InputError(
                f"frame {name} has dimensions {img.shape[1]}x{img.shape[0]}, "
                f"expected {frames[0].shape[1]}x{frames[0].shape[0]}"
            )
        frames.append(img)

    extra = {k: v for k, v in manifest.items() if k not in ("video_id", "fps", "frames")}
    return VideoSequence(
        frames=np.stack(frames),
        fps=float(fps),
        video_id=str(manifest.get("video_id", path.parent.name)),
        metadata=extra,
    )


def save_frames(
    video: VideoSequence,
    directory: str | Path,
    extra: dict | None = None,
    pattern: str = "{:05d}.png",
) -> Path:
    """Write frames as PNGs plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, frame in enumerate(video.frames):
        name = pattern.format(i)
        Image.fromarray(frame, mode="L").save(directory / name)
        names.append(name)
    manifest = {"video_id": video.video_id, "fps": video.fps, "frames": names}
    manifest.update(extra or {})
    out = directory / "manifest.json"
    out.write_text(json.dumps(manifest, indent=1) + "\n")
    return out


def clip_length(fps: float, clip_seconds: float = 5.0) -> int:
    """Frames per clip; never below 2, since a one-frame clip has no inter-frame similarity."""
    return max(2, int(math.floor(clip_seconds * fps + 0.5)))


def segment_clips(video: VideoSequence | np.ndarray, clip_seconds: float = 5.0,
                  fps: float | None = None) -> list[Clip]:
    """Split a video into consecutive non-overlapping clips of ``clip_seconds``.

    A trailing remainder of a single frame is folded into the preceding clip.
    """
    if isinstance(video, VideoSequence):
        frames, fps = video.frames, video.fps
    else:
        frames = np.asarray(video)
        if fps is None:
            raise ValueError("fps is required when passing a raw frame array")
    if clip_seconds <= 0:
        raise ValueError("clip_seconds must be positive")
    total = int(frames.shape[0])
    if total < 1:
        raise InputError("no frames")

    length = clip_length(fps, clip_seconds)
    bounds = list(range(0, total, length))
    if len(bounds) > 1 and total - bounds[-1] < 2:
        bounds.pop()
    ends = bounds[1:] + [total]
    return [Clip(start, frames[start:end]) for start, end in zip(bounds, ends)]


def concat_clips(clips: Sequence[Clip]) -> np.ndarray:
    return np.concatenate([c.frames for c in clips], axis=0)
