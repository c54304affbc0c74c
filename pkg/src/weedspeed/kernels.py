"""Per-pixel hot loops, each in a numba and a numpy/scipy flavour.

The public names (``segment_pixels``, ``binary_open``, ``label_components``,
``box_blur_rows``, ``shift_rows``, ``area_resample``, ``sensor_finish``) dispatch on
:data:`weedspeed._accel.USE_NUMBA`. Both flavours are kept importable
(``*_numba`` / ``*_numpy``) so tests can check them against each other and
the benchmark can time them side by side. The two paths agree bit for bit,
except ``area_resample`` whose float sums differ in the last few ulps.
"""
from functools import lru_cache

import numpy as np
from scipy import ndimage

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# ExG + HSV thresholding


@njit
def _segment_nb(img, exg_min, exg_max, hue_min, hue_max, wrap,
                sat_min, sat_max, val_min, val_max):
    h, w, _ = img.shape
    out = np.zeros((h, w), dtype=np.bool_)
    for y in range(h):
        for x in range(w):
            r = np.int64(img[y, x, 0])
            g = np.int64(img[y, x, 1])
            b = np.int64(img[y, x, 2])
            exg = 2 * g - r - b
            if exg < exg_min or exg > exg_max:
                continue
            mx = max(r, g, b)
            mn = min(r, g, b)
            val = mx / 255.0
            if val < val_min or val > val_max:
                continue
            delta = mx - mn
            sat = delta / mx if mx > 0 else 0.0
            if sat < sat_min or sat > sat_max:
                continue
            if delta == 0:
                hue = 0.0
            elif mx == r:
                hue = (60.0 * ((g - b) / delta)) % 360.0
            elif mx == g:
                hue = 60.0 * ((b - r) / delta + 2.0)
            else:
                hue = 60.0 * ((r - g) / delta + 4.0)
            if wrap:
                if hue < hue_min and hue > hue_max:
                    continue
            elif hue < hue_min or hue > hue_max:
                continue
            out[y, x] = True
    return out


def hsv_planes(img: np.ndarray):
    """Vectorised hexcone HSV of an (H, W, 3) uint8 image.

    Returns hue in degrees [0, 360), saturation and value in [0, 1]; gray
    pixels get hue 0 and saturation 0. The arithmetic mirrors the numba
    kernel operation for operation so both paths round identically.
    """
    rgb = img.astype(np.int64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    delta = mx - mn
    val = mx / 255.0
    with np.errstate(divide="ignore", invalid="ignore"):
        sat = np.where(mx > 0, delta / np.where(mx > 0, mx, 1), 0.0)
        d = np.where(delta > 0, delta, 1)
        hue = np.select(
            [delta == 0, mx == r, mx == g],
            [0.0, np.mod(60.0 * ((g - b) / d), 360.0), 60.0 * ((b - r) / d + 2.0)],
            60.0 * ((r - g) / d + 4.0),
        )
    return hue, sat, val


def _segment_np(img, exg_min, exg_max, hue_min, hue_max, wrap,
                sat_min, sat_max, val_min, val_max):
    rgb = img.astype(np.int64)
    exg = 2 * rgb[..., 1] - rgb[..., 0] - rgb[..., 2]
    hue, sat, val = hsv_planes(img)
    if wrap:
        hue_ok = (hue >= hue_min) | (hue <= hue_max)
    else:
        hue_ok = (hue >= hue_min) & (hue <= hue_max)
    return ((exg >= exg_min) & (exg <= exg_max) & hue_ok
            & (sat >= sat_min) & (sat <= sat_max)
            & (val >= val_min) & (val <= val_max))


# ---------------------------------------------------------------------------
# Binary opening with a disk structuring element.
# Out-of-frame pixels are ignored, so blobs touching the border are not
# eaten from outside.


def disk_offsets(radius: int) -> np.ndarray:
    r = int(radius)
    return np.array([(dy, dx) for dy in range(-r, r + 1) for dx in range(-r, r + 1)
                     if dy * dy + dx * dx <= r * r], dtype=np.int64).reshape(-1, 2)


@njit
def _open_nb(mask, offsets):
    h, w = mask.shape
    n = offsets.shape[0]
    eroded = np.zeros((h, w), dtype=np.bool_)
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            keep = True
            for k in range(n):
                yy = y + offsets[k, 0]
                xx = x + offsets[k, 1]
                if 0 <= yy < h and 0 <= xx < w and not mask[yy, xx]:
                    keep = False
                    break
            eroded[y, x] = keep
    out = np.zeros((h, w), dtype=np.bool_)
    for y in range(h):
        for x in range(w):
            if not eroded[y, x]:
                continue
            for k in range(n):
                yy = y + offsets[k, 0]
                xx = x + offsets[k, 1]
                if 0 <= yy < h and 0 <= xx < w:
                    out[yy, xx] = True
    return out


def _shifted(mask, dy, dx, fill):
    """out[y, x] = mask[y + dy, x + dx], ``fill`` outside the frame."""
    h, w = mask.shape
    out = np.full((h, w), fill, dtype=bool)
    if abs(dy) >= h or abs(dx) >= w:
        return out
    ys, yd = (slice(dy, h), slice(0, h - dy)) if dy >= 0 else (slice(0, h + dy), slice(-dy, h))
    xs, xd = (slice(dx, w), slice(0, w - dx)) if dx >= 0 else (slice(0, w + dx), slice(-dx, w))
    out[yd, xd] = mask[ys, xs]
    return out


def _open_np(mask, offsets):
    eroded = mask.copy()
    for dy, dx in offsets:
        eroded &= _shifted(mask, int(dy), int(dx), True)
    out = np.zeros_like(mask)
    for dy, dx in offsets:
        out |= _shifted(eroded, -int(dy), -int(dx), False)
    return out


# ---------------------------------------------------------------------------
# 8-connected component labelling with per-component statistics.
# Labels are numbered 1..n in raster order of each component's first pixel.
# Stats columns: area, min_x, min_y, max_x, max_y, sum_x, sum_y.

N_STATS = 7


@njit
def _label_nb(mask):
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    stack = np.empty(h * w, dtype=np.int64)
    stats = np.zeros((16, N_STATS), dtype=np.int64)
    n = 0
    for y0 in range(h):
        for x0 in range(w):
            if not mask[y0, x0] or labels[y0, x0] != 0:
                continue
            n += 1
            if n > stats.shape[0]:
                grown = np.zeros((stats.shape[0] * 2, N_STATS), dtype=np.int64)
                grown[: stats.shape[0]] = stats
                stats = grown
            s = stats[n - 1]
            s[1] = x0
            s[2] = y0
            s[3] = x0
            s[4] = y0
            labels[y0, x0] = n
            top = 0
            stack[top] = y0 * w + x0
            top += 1
            while top > 0:
                top -= 1
                p = stack[top]
                y = p // w
                x = p - y * w
                s[0] += 1
                s[5] += x
                s[6] += y
                if x < s[1]:
                    s[1] = x
                if x > s[3]:
                    s[3] = x
                if y < s[2]:
                    s[2] = y
                if y > s[4]:
                    s[4] = y
                for dy in range(-1, 2):
                    yy = y + dy
                    if yy < 0 or yy >= h:
                        continue
                    for dx in range(-1, 2):
                        xx = x + dx
                        if xx < 0 or xx >= w:
                            continue
                        if mask[yy, xx] and labels[yy, xx] == 0:
                            labels[yy, xx] = n
                            stack[top] = yy * w + xx
                            top += 1
    return labels, stats[:n].copy()


_EIGHT = np.ones((3, 3), dtype=bool)


def _label_np(mask):
    labels, n = ndimage.label(mask, structure=_EIGHT)
    labels = labels.astype(np.int32)
    stats = np.zeros((n, N_STATS), dtype=np.int64)
    if n == 0:
        return labels, stats
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs] - 1
    stats[:, 0] = np.bincount(lab, minlength=n)
    stats[:, 5] = np.bincount(lab, weights=xs, minlength=n).astype(np.int64)
    stats[:, 6] = np.bincount(lab, weights=ys, minlength=n).astype(np.int64)
    for i, sl in enumerate(ndimage.find_objects(labels)):
        stats[i, 1] = sl[1].start
        stats[i, 2] = sl[0].start
        stats[i, 3] = sl[1].stop - 1
        stats[i, 4] = sl[0].stop - 1
    return labels, stats


# ---------------------------------------------------------------------------
# Normalised box blur along x (axis 1) with circular wrap, rounded to uint8.
# The window for output column x covers input columns x - (L-1)//2 ... + L-1.


@njit
def _box_rows_nb(img, length):
    h, w, c = img.shape
    a = (length - 1) // 2
    idx = np.empty(w + length - 1, dtype=np.int64)
    for i in range(w + length - 1):
        idx[i] = (i - a) % w
    out = np.empty_like(img)
    acc = np.zeros(c, dtype=np.int64)
    for y in range(h):
        acc[:] = 0
        for k in range(length):
            for ch in range(c):
                acc[ch] += img[y, idx[k], ch]
        for x in range(w):
            xin = idx[x + length] if x + length < w + length - 1 else 0
            xout = idx[x]
            for ch in range(c):
                out[y, x, ch] = np.uint8(np.rint(acc[ch] / length))
                if x + 1 < w:
                    acc[ch] += np.int64(img[y, xin, ch]) - np.int64(img[y, xout, ch])
    return out


def _box_rows_np(img, length):
    h, w, _ = img.shape
    a = (length - 1) // 2
    idx = (np.arange(w + length - 1) - a) % w
    ext = img[:, idx, :].astype(np.int64)
    cs = np.zeros((h, w + length, ext.shape[2]), dtype=np.int64)
    np.cumsum(ext, axis=1, out=cs[:, 1:, :])
    sums = cs[:, length:length + w, :] - cs[:, :w, :]
    return np.rint(sums / length).astype(np.uint8)


# ---------------------------------------------------------------------------
# Per-row horizontal shift with edge replication: out[y, x] = in[y, x + s[y]].


@njit
def _shift_rows_nb(img, shifts):
    h, w, c = img.shape
    out = np.empty_like(img)
    for y in range(h):
        s = shifts[y]
        for x in range(w):
            xx = min(max(x + s, 0), w - 1)
            for ch in range(c):
                out[y, x, ch] = img[y, xx, ch]
    return out


def _shift_rows_np(img, shifts):
    h, w, _ = img.shape
    cols = np.clip(np.arange(w)[None, :] + shifts[:, None], 0, w - 1)
    return img[np.arange(h)[:, None], cols]


# ---------------------------------------------------------------------------
# Area-averaging resample of an (H, W, C) uint8 image to float64 (h, w, C).
# Output pixel j along an axis averages input span [j*n/m, (j+1)*n/m), with
# fractional coverage at both ends. The two flavours agree to ~1e-12 (they
# sum in different orders), not bit for bit.


def _area_spans(n_in, n_out):
    edges = np.arange(n_out + 1) * (n_in / n_out)
    return np.floor(edges).astype(np.int64), edges


@lru_cache(maxsize=32)
def _area_weights(n_in, n_out):
    """CSR rows (ptr, idx, weight): output j = sum weight * input idx."""
    first, edges = _area_spans(n_in, n_out)
    scale = n_in / n_out
    ptr, idx, wgt = [0], [], []
    for j in range(n_out):
        lo, hi = edges[j], edges[j + 1]
        i = int(first[j])
        while i < n_in and i < hi:
            cover = min(hi, i + 1.0) - max(lo, float(i))
            if cover > 0:
                idx.append(i)
                wgt.append(cover / scale)
            i += 1
        ptr.append(len(idx))
    return np.array(ptr, dtype=np.int64), np.array(idx, dtype=np.int64), np.array(wgt, dtype=np.float64)


@njit
def _area_axis1_nb(img, ptr, idx, wgt, n_out):
    h = img.shape[0]
    c = img.shape[2]
    out = np.empty((h, n_out, c), dtype=np.float64)
    acc = np.empty(c, dtype=np.float64)
    for y in range(h):
        for j in range(n_out):
            acc[:] = 0.0
            for k in range(ptr[j], ptr[j + 1]):
                i = idx[k]
                t = wgt[k]
                for ch in range(c):
                    acc[ch] += t * img[y, i, ch]
            for ch in range(c):
                out[y, j, ch] = acc[ch]
    return out


@njit
def _area_axis0_nb(img, ptr, idx, wgt, n_out):
    w = img.shape[1]
    c = img.shape[2]
    out = np.zeros((n_out, w, c), dtype=np.float64)
    for j in range(n_out):
        for k in range(ptr[j], ptr[j + 1]):
            i = idx[k]
            t = wgt[k]
            for x in range(w):
                for ch in range(c):
                    out[j, x, ch] += t * img[i, x, ch]
    return out


def _area_resample_nb(img, height, width):
    tmp = _area_axis1_nb(img, *_area_weights(img.shape[1], width), width)
    return _area_axis0_nb(tmp, *_area_weights(img.shape[0], height), height)


def _area_axis_np(a, n_out, axis):
    n_in = a.shape[axis]
    if n_out == n_in:
        return a
    a = np.moveaxis(a, axis, 0)
    cs = np.zeros((n_in + 1,) + a.shape[1:], dtype=np.float64)
    np.cumsum(a, axis=0, out=cs[1:])
    i, edges = _area_spans(n_in, n_out)
    i = np.minimum(i, n_in - 1)
    frac = (edges - i).reshape((-1,) + (1,) * (a.ndim - 1))
    integral = cs[i] + frac * a[i]
    out = (integral[1:] - integral[:-1]) / (n_in / n_out)
    return np.moveaxis(out, 0, axis)


def _area_resample_np(img, height, width):
    out = img.astype(np.float64)
    out = _area_axis_np(out, width, 1)
    return _area_axis_np(out, height, 0)


# ---------------------------------------------------------------------------
# Sensor finishing: gain (clipped at 255), additive noise, clip, round to uint8.


@njit
def _sensor_finish_nb(img, gain, noise, sigma):
    h, w, c = img.shape
    out = np.empty((h, w, c), dtype=np.uint8)
    for y in range(h):
        for x in range(w):
            for ch in range(c):
                v = min(img[y, x, ch] * gain, 255.0)
                if sigma > 0:
                    v = v + sigma * np.float64(noise[y, x, ch])
                v = min(max(v, 0.0), 255.0)
                out[y, x, ch] = np.uint8(np.rint(v))
    return out


def _sensor_finish_np(img, gain, noise, sigma):
    v = np.minimum(img * gain, 255.0)
    if sigma > 0:
        v = v + sigma * noise.astype(np.float64)
    return np.rint(np.clip(v, 0.0, 255.0)).astype(np.uint8)


# ---------------------------------------------------------------------------
# dispatch

segment_pixels_numba, segment_pixels_numpy = _segment_nb, _segment_np
binary_open_numba, binary_open_numpy = _open_nb, _open_np
label_components_numba, label_components_numpy = _label_nb, _label_np
box_blur_rows_numba, box_blur_rows_numpy = _box_rows_nb, _box_rows_np
shift_rows_numba, shift_rows_numpy = _shift_rows_nb, _shift_rows_np
area_resample_numba = _area_resample_nb if _area_axis1_nb is not None else None
area_resample_numpy = _area_resample_np
sensor_finish_numba, sensor_finish_numpy = _sensor_finish_nb, _sensor_finish_np


def _pick(nb, np_):
    return nb if USE_NUMBA and nb is not None else np_


def segment_pixels(img, exg_min, exg_max, hue_min, hue_max, wrap,
                   sat_min, sat_max, val_min, val_max):
    fn = _pick(_segment_nb, _segment_np)
    return fn(np.ascontiguousarray(img, dtype=np.uint8), int(exg_min), int(exg_max),
              float(hue_min), float(hue_max), bool(wrap), float(sat_min), float(sat_max),
              float(val_min), float(val_max))


def binary_open(mask, radius):
    if radius <= 0:
        return np.array(mask, dtype=bool, copy=True)
    fn = _pick(_open_nb, _open_np)
    return fn(np.ascontiguousarray(mask, dtype=np.bool_), disk_offsets(radius))


def label_components(mask):
    fn = _pick(_label_nb, _label_np)
    return fn(np.ascontiguousarray(mask, dtype=np.bool_))


def box_blur_rows(img, length):
    fn = _pick(_box_rows_nb, _box_rows_np)
    return fn(np.ascontiguousarray(img, dtype=np.uint8), int(length))


def shift_rows(img, shifts):
    fn = _pick(_shift_rows_nb, _shift_rows_np)
    return fn(np.ascontiguousarray(img, dtype=np.uint8), np.asarray(shifts, dtype=np.int64))


def area_resample(img, height, width):
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.shape[:2] == (height, width):
        return img.astype(np.float64)
    fn = _pick(area_resample_numba, _area_resample_np)
    return fn(img, int(height), int(width))


def sensor_finish(img, gain, noise, sigma):
    """``noise`` is a standard-normal array shaped like ``img`` (ignored when sigma is 0)."""
    fn = _pick(_sensor_finish_nb, _sensor_finish_np)
    img = np.ascontiguousarray(img, dtype=np.float64)
    if noise is None:
        noise = np.zeros((1, 1, 1), dtype=np.float32)
        sigma = 0.0
    return fn(img, float(gain), np.ascontiguousarray(noise, dtype=np.float32), float(sigma))
