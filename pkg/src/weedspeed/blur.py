"""No-reference sharpness from the share of high-frequency spectral energy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import as_rgb

DEFAULT_CUTOFF = 0.25
BT601 = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class BlurScore:
    score: float
    cutoff_radius_frac: float


def luminance(image) -> np.ndarray:
    """BT.601 luma of an 8-bit RGB image, or of a float RGB array on the same scale."""
    img = np.asarray(image)
    if img.dtype.kind == "f":
        if img.ndim != 3 or img.shape[2] != 3:
            raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
        if not np.isfinite(img).all():
            raise ValueError("image contains non-finite values")
        return img.astype(np.float64) @ BT601
    return as_rgb(img).astype(np.float64) @ BT601


def high_frequency_mask(height: int, width: int, cutoff_radius_frac: float) -> np.ndarray:
    """Bins of a centred (fftshift-ed) spectrum lying beyond the cutoff radius."""
    yy = np.arange(height) - height // 2
    xx = np.arange(width) - width // 2
    radius = np.hypot(yy[:, None], xx[None, :])
    return radius > cutoff_radius_frac * (min(width, height) / 2.0)


def fft_blur_score(image, cutoff_radius_frac: float = DEFAULT_CUTOFF) -> BlurScore:
    """Fraction of non-DC spectral energy beyond ``cutoff_radius_frac`` of min(W, H)/2.

    Higher means sharper. A constant image has no non-DC energy and scores 0.
    """
    if not 0.0 < cutoff_radius_frac < 1.0:
        raise ValueError("cutoff_radius_frac must lie in (0, 1)")
    lum = luminance(image)
    h, w = lum.shape
    if h < 8 or w < 8:
        raise ValueError("image must be at least 8x8")
    if np.ptp(lum) == 0:
        return BlurScore(0.0, cutoff_radius_frac)
    power = np.abs(np.fft.fftshift(np.fft.fft2(lum))) ** 2
    power[h // 2, w // 2] = 0.0  # DC
    total = power.sum()
    if total <= 0.0:
        return BlurScore(0.0, cutoff_radius_frac)
    high = power[high_frequency_mask(h, w, cutoff_radius_frac)].sum()
    return BlurScore(float(min(1.0, high / total)), cutoff_radius_frac)
