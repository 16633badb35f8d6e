"""Adaptive per-pixel Gaussian mixture background subtraction (MOG2).

Grayscale only, no shadow class.  Each pixel carries up to ``max_modes``
1-D Gaussians sorted by weight.  The whole image is updated at once: the
state lives in ``(H, W, M)`` arrays where unused slots sit at the tail of the
last axis with ``valid == False``.

Defaults follow the widely used OpenCV implementation (history 500,
varThreshold 16, varThresholdGen 9, backgroundRatio 0.9, ct 0.05, five
modes, initial variance 15**2 clamped to [4, 5 * 225]).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class BgConfig:
    history: int = 500
    var_threshold_bg: float = 16.0
    var_threshold_gen: float = 9.0
    background_ratio: float = 0.9
    ct: float = 0.05
    max_modes: int = 5
    var_init: float = 225.0
    var_min: float = 4.0
    var_max: float | None = None  # None -> 5 * var_init

    def __post_init__(self) -> None:
        if self.history < 1:
            raise ValueError("history must be >= 1")
        if self.max_modes < 1:
            raise ValueError("max_modes must be >= 1")
        if self.var_threshold_bg <= 0 or self.var_threshold_gen <= 0:
            raise ValueError("variance thresholds must be positive")
        if not 0 < self.background_ratio <= 1:
            raise ValueError("background_ratio must lie in (0, 1]")
        if self.ct < 0:
            raise ValueError("ct must be non-negative")
        if not 0 < self.var_min <= self.var_init <= self.variance_max:
            raise ValueError("need 0 < var_min <= var_init <= var_max")

    @property
    def alpha(self) -> float:
        return 1.0 / self.history

    @property
    def variance_max(self) -> float:
        return 5.0 * self.var_init if self.var_max is None else self.var_max

    def to_dict(self) -> dict:
        d = asdict(self)
        d["var_max"] = self.variance_max
        return d


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: float
    var: float


@dataclass
class PixelModel:
    components: list[GaussianComponent] = field(default_factory=list)


def classify_pixel(pixel: PixelModel, value: float, cfg: BgConfig = BgConfig()) -> bool:
    """Return True when ``value`` is foreground under ``pixel``'s mixture.

    The background set is the shortest weight-sorted prefix whose cumulative
    weight exceeds ``background_ratio``.
    """
    comps = sorted(pixel.components, key=lambda c: -c.weight)
    total = 0.0
    for c in comps:
        if (value - c.mean) ** 2 / c.var < cfg.var_threshold_bg:
            return False
        total += c.weight
        if total > cfg.background_ratio:
            break
    return True


class BackgroundModel:
    """Mixture state for a whole frame."""

    def __init__(self, weight: np.ndarray, mean: np.ndarray, var: np.ndarray,
                 valid: np.ndarray, cfg: BgConfig):
        self.weight = weight
        self.mean = mean
        self.var = var
        self.valid = valid
        self.cfg = cfg
        self.frames_seen = 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.weight.shape[:2]

    @property
    def num_modes(self) -> np.ndarray:
        return self.valid.sum(axis=-1)

    def pixel(self, row: int, col: int) -> PixelModel:
        n = int(self.valid[row, col].sum())
        return PixelModel([
            GaussianComponent(float(self.weight[row, col, m]), float(self.mean[row, col, m]),
                              float(self.var[row, col, m]))
            for m in range(n)
        ])

    def background_image(self) -> np.ndarray:
        """Mean of the heaviest component per pixel, as uint8."""
        return np.clip(np.floor(self.mean[..., 0] + 0.5), 0, 255).astype(np.uint8)

    def copy(self) -> "BackgroundModel":
        m = BackgroundModel(self.weight.copy(), self.mean.copy(), self.var.copy(),
                            self.valid.copy(), self.cfg)
        m.frames_seen = self.frames_seen
        return m


def bg_init(first_frame: np.ndarray, cfg: BgConfig = BgConfig()) -> BackgroundModel:
    frame = np.asarray(first_frame, dtype=np.float64)
    if frame.ndim != 2:
        raise InputError(f"expected a 2-D grayscale frame, got shape {frame.shape}")
    h, w = frame.shape
    m = cfg.max_modes
    weight = np.zeros((h, w, m))
    mean = np.zeros((h, w, m))
    var = np.full((h, w, m), cfg.var_init)
    valid = np.zeros((h, w, m), dtype=bool)
    weight[..., 0] = 1.0
    mean[..., 0] = frame
    valid[..., 0] = True
    return BackgroundModel(weight, mean, var, valid, cfg)


def _foreground(model: BackgroundModel, d2: np.ndarray) -> np.ndarray:
    cfg = model.cfg
    w = np.where(model.valid, model.weight, 0.0)
    before = np.cumsum(w, axis=-1) - w
    in_bg = model.valid & ~(before > cfg.background_ratio)
    return ~np.any(in_bg & (d2 < cfg.var_threshold_bg), axis=-1)


def bg_update(model: BackgroundModel, frame: np.ndarray) -> np.ndarray:
    """Classify ``frame`` against the model, then fold it in.  Returns the bool mask."""
    cfg = model.cfg
    x = np.asarray(frame, dtype=np.float64)
    if x.shape != model.shape:
        raise InputError(f"frame shape {x.shape} does not match model {model.shape}")
    alpha = cfg.alpha
    valid = model.valid
    diff = x[..., None] - model.mean
    d2 = diff * diff / model.var

    mask = _foreground(model, d2)

    # ownership: closest component within the generation threshold
    cand = valid & (d2 < cfg.var_threshold_gen)
    has_owner = cand.any(axis=-1)
    owner = np.argmin(np.where(cand, d2, np.inf), axis=-1)
    own = np.zeros_like(valid)
    np.put_along_axis(own, owner[..., None], has_owner[..., None], axis=-1)

    weight = np.where(valid, model.weight + alpha * (own - model.weight) - alpha * cfg.ct, 0.0)

    # mean / variance of the owner, using its updated weight
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(own, alpha / weight, 0.0)
    mean = model.mean + k * diff
    var = np.clip(model.var + k * (diff * diff - model.var), cfg.var_min, cfg.variance_max)

    valid = valid & (weight > 0)
    weight = np.where(valid, weight, 0.0)

    # new component where nothing matched: free slot first, else the lightest one
    new = ~has_owner
    if new.any():
        key = np.where(valid, weight, -np.inf)
        slot = np.argmin(key, axis=-1)[..., None]
        rows = new[..., None]
        for arr, val in ((weight, alpha), (mean, x[..., None]), (var, cfg.var_init)):
            cur = np.take_along_axis(arr, slot, axis=-1)
            np.put_along_axis(arr, slot, np.where(rows, val, cur), axis=-1)
        cur_valid = np.take_along_axis(valid, slot, axis=-1)
        np.put_along_axis(valid, slot, cur_valid | rows, axis=-1)

    weight = weight / weight.sum(axis=-1, keepdims=True)

    order = np.argsort(np.where(valid, -weight, np.inf), axis=-1, kind="stable")
    model.weight = np.take_along_axis(weight, order, axis=-1)
    model.mean = np.take_along_axis(mean, order, axis=-1)
    model.var = np.take_along_axis(var, order, axis=-1)
    model.valid = np.take_along_axis(valid, order, axis=-1)
    model.frames_seen += 1
    return mask


def foreground_masks(frames: np.ndarray, cfg: BgConfig = BgConfig()) -> np.ndarray:
    """Run the model over a (T, H, W) stack; mask 0 is empty (model seeded there)."""
    frames = np.asarray(frames)
    if frames.ndim != 3 or len(frames) == 0:
        raise InputError("expected a non-empty (T, H, W) frame stack")
    masks = np.zeros(frames.shape, dtype=bool)
    model = bg_init(frames[0], cfg)
    for t in range(1, len(frames)):
        masks[t] = bg_update(model, frames[t])
    return masks


def check_model(model: BackgroundModel, atol: float = 1e-9) -> None:
    """Raise `InvariantError` if weights, variances or mode counts are off."""
    from .errors import InvariantError

    cfg = model.cfg
    sums = np.where(model.valid, model.weight, 0.0).sum(axis=-1)
    if not np.allclose(sums, 1.0, rtol=0, atol=atol):
        raise InvariantError(f"weights do not sum to 1 (max dev {np.abs(sums - 1).max():.3g})")
    v = model.var[model.valid]
    if v.size and (v.min() < cfg.var_min or v.max() > cfg.variance_max):
        raise InvariantError("component variance outside [var_min, var_max]")
    n = model.num_modes
    if n.min() < 1 or n.max() > cfg.max_modes:
        raise InvariantError("component count outside [1, max_modes]")
