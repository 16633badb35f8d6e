"""Rectify point-tracker output on static-camera videos.

Static-camera videos are recognised from frame-to-reference SSIM; moving
pixels are found with a Gaussian-mixture background model, and trajectory
points that fall outside the moving regions are snapped back to their query
positions.  Results are scored with Average Jaccard.
"""
from .background import BgConfig, bg_init, bg_update, classify_pixel, foreground_masks
from .camera_motion import CameraMotionConfig, CameraMotionResult, coarse_detect, detect, fine_detect_clip
from .errors import InputError, InvariantError
from .metrics import AJConfig, AJResult, average_jaccard, jaccard_at
from .pipeline import PipelineConfig, process_video, run_batch, run_pipeline
from .rectify import RectifyMode, is_moving_point, rectify_video, static_baseline
from .region import ConfidentMovingRegion, extract_regions, point_in_region
from .ssim import SsimParams, ssim
from .tracks import QueryPoint, TrackPoint, TrackSet, Trajectory, load_trajectories, save_trajectories
from .video_io import Clip, VideoSequence, load_frames, segment_clips, to_grayscale

__version__ = "0.1.0"
