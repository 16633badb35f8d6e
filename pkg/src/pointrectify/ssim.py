"""Structural similarity between grayscale frames.

Reproduces the default behaviour of ``skimage.metrics.structural_similarity``
on 8-bit input: a 7x7 uniform window, sample-covariance normalisation, and a
mean taken over the map after cropping ``(win - 1) // 2`` pixels per border.

Only the cropped interior is ever averaged, so the box sums are evaluated as
"valid" windows via a summed-area table.  With integer-valued 8-bit input all
the window sums are exact in float64, which makes ``ssim(a, a) == 1.0`` and
``ssim(a, b) == ssim(b, a)`` hold bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class SsimParams:
    window: int = 7
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 255.0
    sample_covariance: bool = True

    def __post_init__(self) -> None:
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3, got {self.window}")
        if self.data_range <= 0:
            raise ValueError("data_range must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.data_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.data_range) ** 2


DEFAULT_PARAMS = SsimParams()


def _window_sums(img: np.ndarray, win: int) -> np.ndarray:
    """Sum over every fully-contained ``win x win`` window (valid mode)."""
    sat = np.zeros((img.shape[0] + 1, img.shape[1] + 1), dtype=np.float64)
    np.cumsum(img, axis=0, out=sat[1:, 1:])
    np.cumsum(sat[1:, 1:], axis=1, out=sat[1:, 1:])
    return sat[win:, win:] - sat[:-win, win:] - sat[win:, :-win] + sat[:-win, :-win]


def ssim_map(a: np.ndarray, b: np.ndarray, p: SsimParams = DEFAULT_PARAMS) -> np.ndarray:
    """Per-pixel SSIM over the border-cropped interior, shape (H-win+1, W-win+1)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InputError(f"frame dimensions differ: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise InputError(f"expected 2-D grayscale frames, got shape {a.shape}")
    win = p.window
    if min(a.shape) < win:
        raise InputError(f"frame {a.shape} is smaller than the {win}x{win} window")

    x = a.astype(np.float64)
    y = b.astype(np.float64)
    n = win * win
    ux = _window_sums(x, win) / n
    uy = _window_sums(y, win) / n
    uxx = _window_sums(x * x, win) / n
    uyy = _window_sums(y * y, win) / n
    uxy = _window_sums(x * y, win) / n

    norm = n / (n - 1) if p.sample_covariance else 1.0
    vx = norm * (uxx - ux * ux)
    vy = norm * (uyy - uy * uy)
    vxy = norm * (uxy - ux * uy)

    c1, c2 = p.c1, p.c2
    num = (2 * ux * uy + c1) * (2 * vxy + c2)
    den = (ux * ux + uy * uy + c1) * (vx + vy + c2)
    return num / den


def ssim(a: np.ndarray, b: np.ndarray, p: SsimParams = DEFAULT_PARAMS) -> float:
    return float(ssim_map(a, b, p).mean())
