"""Reading and writing RGB images and drawing detection boxes.

Binary PPM (P6) is handled by a small built-in codec; every other format
goes through Pillow.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .imaging import Detection, as_rgb

IMAGE_SUFFIXES = (".png", ".ppm", ".pnm", ".bmp", ".tif", ".tiff", ".jpg", ".jpeg")
PPM_SUFFIXES = (".ppm", ".pnm")


def _ppm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(data[start:pos]))
    return tokens, pos + 1


def read_ppm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:2] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    try:
        (w, h, maxval), pos = _ppm_tokens(data[2:], 3)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PPM header") from exc
    if maxval != 255:
        raise ValueError(f"{path}: only 8-bit PPM is supported (maxval {maxval})")
    body = data[2 + pos:2 + pos + w * h * 3]
    if len(body) != w * h * 3:
        raise ValueError(f"{path}: truncated PPM data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3).copy()


def write_ppm(path: str | Path, image: np.ndarray) -> None:
    img = as_rgb(image)
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(img).tobytes())


def read_rgb(path: str | Path) -> np.ndarray:
    """Load an image as an (H, W, 3) uint8 array."""
    if Path(path).suffix.lower() in PPM_SUFFIXES:
        with open(path, "rb") as fh:
            magic = fh.read(2)
        if magic == b"P6":
            return read_ppm(path)
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except (UnidentifiedImageError, OSError) as exc:
        raise ValueError(f"cannot read image {path}: {exc}") from exc


def write_rgb(path: str | Path, image: np.ndarray) -> None:
    """Save an RGB array; the format follows the file suffix (PNG if none)."""
    img = as_rgb(image)
    path = Path(path)
    if path.suffix.lower() in PPM_SUFFIXES:
        write_ppm(path, img)
        return
    fmt = None if path.suffix else "PNG"
    Image.fromarray(img, "RGB").save(path, format=fmt)


def list_images(path: str | Path) -> list[Path]:
    """A single file, or the image files of a directory in name order."""
    p = Path(path)
    if p.is_dir():
        return sorted(f for f in p.iterdir() if f.suffix.lower() in IMAGE_SUFFIXES and f.is_file())
    if not p.exists():
        raise FileNotFoundError(f"no such file or directory: {p}")
    return [p]


def draw_boxes(image: np.ndarray, detections: Sequence[Detection],
               color: tuple[int, int, int] = (255, 0, 0)) -> np.ndarray:
    """Copy of ``image`` with a one-pixel outline around every bounding box."""
    out = as_rgb(image).copy()
    for d in detections:
        x, y, w, h = d.bbox
        x1, y1 = x + w - 1, y + h - 1
        out[y, x:x1 + 1] = color
        out[y1, x:x1 + 1] = color
        out[y:y1 + 1, x] = color
        out[y:y1 + 1, x1] = color
    return out
