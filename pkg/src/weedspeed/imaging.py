"""Green-on-brown weed detection: ExG + HSV thresholds, opening, blob extraction.

Images are ``(H, W, 3)`` uint8 RGB arrays, masks are ``(H, W)`` bool arrays
and the ExG map is an ``(H, W)`` int16 array.
"""
from __future__ import annotations

import colorsys
from dataclasses import dataclass, fields

import numpy as np

from . import kernels


@dataclass(frozen=True)
class DetectionParams:
    """Thresholds for :func:`segment` and :func:`extract_detections`.

    Hue is in degrees on [0, 360); when ``hue_min > hue_max`` the accepted
    band wraps through 0 (see :attr:`wrap_hue`). Saturation and value are
    fractions of full scale.
    """

    exg_min: int = 25
    exg_max: int = 255
    hue_min: float = 60.0
    hue_max: float = 170.0
    sat_min: float = 0.24
    sat_max: float = 1.0
    val_min: float = 0.24
    val_max: float = 0.98
    min_blob_area: int = 10
    morph_open_radius: int = 1

    def __post_init__(self):
        if self.exg_min > self.exg_max:
            raise ValueError("exg_min must not exceed exg_max")
        if self.sat_min > self.sat_max:
            raise ValueError("sat_min must not exceed sat_max")
        if self.val_min > self.val_max:
            raise ValueError("val_min must not exceed val_max")
        if self.min_blob_area < 1:
            raise ValueError("min_blob_area must be >= 1")
        if self.morph_open_radius < 0:
            raise ValueError("morph_open_radius must be >= 0")
        for name in ("hue_min", "hue_max"):
            if not 0.0 <= getattr(self, name) < 360.0:
                raise ValueError(f"{name} must lie in [0, 360)")

    @property
    def wrap_hue(self) -> bool:
        return self.hue_min > self.hue_max

    @classmethod
    def from_mapping(cls, data: dict) -> "DetectionParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown detection keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class Detection:
    bbox: tuple[int, int, int, int]  # x, y, w, h
    centroid: tuple[float, float]
    area: int


def as_rgb(image) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 samples, got {img.dtype}")
    return img


def compute_exg(image) -> np.ndarray:
    """Excess green ``2G - R - B`` on the raw 8-bit channels."""
    rgb = as_rgb(image).astype(np.int16)
    return 2 * rgb[..., 1] - rgb[..., 0] - rgb[..., 2]


def rgb_to_hsv(pixel) -> tuple[float, float, float]:
    """Hexcone HSV of one 8-bit RGB triple: (hue degrees, saturation, value)."""
    r, g, b = (int(c) for c in pixel)
    for c in (r, g, b):
        if not 0 <= c <= 255:
            raise ValueError(f"channel out of 8-bit range: {pixel!r}")
    hue, sat, val = kernels.hsv_planes(np.array([[[r, g, b]]], dtype=np.uint8))
    return float(hue[0, 0]), float(sat[0, 0]), float(val[0, 0])


def hsv_to_rgb(hue: float, sat: float, val: float) -> tuple[int, int, int]:
    r, g, b = colorsys.hsv_to_rgb((hue % 360.0) / 360.0, sat, val)
    return round(r * 255), round(g * 255), round(b * 255)


def segment(image, params: DetectionParams = DetectionParams()) -> np.ndarray:
    """Plant mask: ExG window AND hue band AND saturation AND value windows."""
    p = params
    return kernels.segment_pixels(as_rgb(image), p.exg_min, p.exg_max, p.hue_min, p.hue_max,
                                  p.wrap_hue, p.sat_min, p.sat_max, p.val_min, p.val_max)


def extract_detections(mask, params: DetectionParams = DetectionParams()) -> list[Detection]:
    """Open the mask, label 8-connected blobs, keep those of at least ``min_blob_area``.

    Detections come back largest first; equal areas keep raster order.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-D")
    if not mask.any():
        return []
    opened = kernels.binary_open(mask, params.morph_open_radius)
    _, stats = kernels.label_components(opened)
    if len(stats) == 0:
        return []
    keep = np.flatnonzero(stats[:, 0] >= params.min_blob_area)
    order = keep[np.argsort(-stats[keep, 0], kind="stable")]
    out = []
    for i in order:
        area, x0, y0, x1, y1, sx, sy = (int(v) for v in stats[i])
        out.append(Detection(bbox=(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
                             centroid=(sx / area, sy / area), area=area))
    return out


def detect(image, params: DetectionParams = DetectionParams()) -> list[Detection]:
    return extract_detections(segment(image, params), params)
