import colorsys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import flood_fill_components
from weedspeed.imaging import (Detection, DetectionParams, compute_exg, detect, extract_detections,
                               rgb_to_hsv, segment)

OPEN_ALL = DetectionParams(exg_min=-510, exg_max=510, hue_min=0.0, hue_max=359.999,
                           sat_min=0.0, sat_max=1.0, val_min=0.0, val_max=1.0)
NO_FILTER = DetectionParams(morph_open_radius=0, min_blob_area=1)

images = arrays(np.uint8, st.tuples(st.integers(1, 24), st.integers(1, 24), st.just(3)))
masks = arrays(bool, st.tuples(st.integers(1, 40), st.integers(1, 40)))


def px(rgb):
    return np.array([[rgb]], dtype=np.uint8)


# --- ExG -------------------------------------------------------------------

@pytest.mark.parametrize("rgb, expected", [
    ((100, 100, 100), 0), ((50, 100, 50), 100), ((0, 255, 0), 510), ((255, 0, 255), -510),
])
def test_exg_examples(rgb, expected):
    assert compute_exg(px(rgb))[0, 0] == expected


@given(images)
def test_exg_range_and_formula(img):
    exg = compute_exg(img)
    assert exg.shape == img.shape[:2]
    assert exg.min() >= -510 and exg.max() <= 510
    r, g, b = (img[..., i].astype(int) for i in range(3))
    np.testing.assert_array_equal(exg, 2 * g - r - b)


@given(st.integers(0, 255))
def test_exg_of_gray_is_zero(v):
    assert compute_exg(px((v, v, v)))[0, 0] == 0


@pytest.mark.parametrize("bad", [np.zeros((4, 4), np.uint8), np.zeros((4, 4, 3), np.float32),
                                 np.zeros((0, 4, 3), np.uint8)])
def test_invalid_images_rejected(bad):
    with pytest.raises(ValueError):
        compute_exg(bad)


# --- HSV -------------------------------------------------------------------

def test_hsv_examples():
    assert rgb_to_hsv((255, 0, 0)) == (0.0, 1.0, 1.0)
    assert rgb_to_hsv((0, 255, 0)) == (120.0, 1.0, 1.0)
    h, s, v = rgb_to_hsv((128, 128, 128))
    assert (h, s) == (0.0, 0.0) and v == pytest.approx(128 / 255) and round(v, 3) == 0.502


@given(st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)))
def test_hsv_matches_colorsys(rgb):
    h, s, v = rgb_to_hsv(rgb)
    eh, es, ev = colorsys.rgb_to_hsv(*(c / 255 for c in rgb))
    assert s == pytest.approx(es, abs=1e-12) and v == pytest.approx(ev, abs=1e-12)
    if es > 0:
        d = abs(h - eh * 360.0) % 360.0
        assert min(d, 360.0 - d) < 1e-9
    assert 0.0 <= h < 360.0


def _hsv_to_rgb_vec(h, s, v):
    # standard hexcone inverse, independent of the library code
    c = v * s
    hp = h / 60.0
    x = c * (1 - np.abs(hp % 2 - 1))
    z = np.zeros_like(h)
    sector = np.floor(hp).astype(int) % 6
    r = np.choose(sector, [c, x, z, z, x, c])
    g = np.choose(sector, [x, c, c, x, z, z])
    b = np.choose(sector, [z, z, x, c, c, x])
    m = v - c
    return np.stack([r + m, g + m, b + m], axis=-1) * 255.0


def test_hsv_round_trip_strided_cube():
    from weedspeed.kernels import hsv_planes

    flat = np.arange(0, 256 ** 3, 7, dtype=np.int64)
    rgb = np.stack([flat >> 16, (flat >> 8) & 255, flat & 255], axis=-1).astype(np.uint8)[None]
    h, s, v = hsv_planes(rgb)
    back = np.rint(_hsv_to_rgb_vec(h, s, v)).astype(int)
    assert np.abs(back - rgb.astype(int)).max() <= 1


# --- segmentation ----------------------------------------------------------

def test_gray_image_gives_empty_mask():
    img = np.full((10, 12, 3), 90, np.uint8)
    assert not segment(img, DetectionParams(sat_min=0.1)).any()


@given(images)
def test_vacuous_thresholds_select_everything(img):
    assert segment(img, OPEN_ALL).all()


def test_single_green_pixel_on_gray():
    img = np.full((9, 9, 3), 128, np.uint8)
    img[4, 6] = (0, 255, 0)
    # thresholds not named by the case are left open
    p = DetectionParams(exg_min=25, exg_max=510, hue_min=60, hue_max=130, sat_min=0.3,
                        val_min=0.0, val_max=1.0)
    mask = segment(img, p)
    assert mask.sum() == 1 and mask[4, 6]
    np.testing.assert_array_equal(mask, _oracle_mask(img, p))


def test_default_caps_reject_saturated_glare():
    img = np.array([[(0, 255, 0), (60, 160, 60)]], dtype=np.uint8)
    np.testing.assert_array_equal(segment(img), [[False, True]])


def _oracle_mask(img, p: DetectionParams):
    out = np.zeros(img.shape[:2], bool)
    for y in range(img.shape[0]):
        for x in range(img.shape[1]):
            r, g, b = (int(c) for c in img[y, x])
            e = 2 * g - r - b
            hh, ss, vv = colorsys.rgb_to_hsv(r / 255, g / 255, b / 255)
            hh *= 360.0
            if p.wrap_hue:
                hue_ok = hh >= p.hue_min or hh <= p.hue_max
            else:
                hue_ok = p.hue_min <= hh <= p.hue_max
            out[y, x] = (p.exg_min <= e <= p.exg_max and hue_ok and p.sat_min <= ss <= p.sat_max
                         and p.val_min <= vv <= p.val_max)
    return out


params_st = st.builds(
    lambda e, hmin, hmax, s, v: DetectionParams(exg_min=e, hue_min=hmin, hue_max=hmax, sat_min=s, val_min=v),
    st.integers(-50, 100), st.floats(0, 359), st.floats(0, 359), st.floats(0, 0.9), st.floats(0, 0.9))


@given(images, params_st)
def test_segment_matches_per_pixel_oracle(img, p):
    # thresholds landing exactly on an 8-bit ratio are measure-zero under float draws
    np.testing.assert_array_equal(segment(img, p), _oracle_mask(img, p))


def test_wrapping_hue_band():
    red, green = (200, 20, 20), (20, 200, 20)
    img = np.array([[red, green]], dtype=np.uint8)
    p = DetectionParams(exg_min=-510, hue_min=300, hue_max=30, sat_min=0.1)
    assert p.wrap_hue
    np.testing.assert_array_equal(segment(img, p), [[True, False]])


@given(images, st.integers(-100, 100), st.integers(0, 155), st.floats(0, 0.5), st.floats(0, 0.5))
def test_threshold_monotonicity(img, e, de, s, ds):
    loose = DetectionParams(exg_min=e, sat_min=s)
    tight = DetectionParams(exg_min=e + de, sat_min=s + ds, hue_min=70.0, hue_max=150.0)
    a, b = segment(img, loose), segment(img, tight)
    assert not (b & ~a).any()


def test_params_validation():
    with pytest.raises(ValueError):
        DetectionParams(exg_min=10, exg_max=5)
    with pytest.raises(ValueError):
        DetectionParams(min_blob_area=0)
    with pytest.raises(ValueError):
        DetectionParams(hue_max=360.0)
    with pytest.raises(ValueError):
        DetectionParams.from_mapping({"exg_low": 3})


# --- blob extraction -------------------------------------------------------

def test_empty_mask_gives_no_detections():
    assert extract_detections(np.zeros((20, 20), bool)) == []


def test_solid_block():
    m = np.zeros((30, 30), bool)
    m[5:15, 5:15] = True
    (d,) = extract_detections(m, NO_FILTER)
    assert d == Detection(bbox=(5, 5, 10, 10), centroid=(9.5, 9.5), area=100)


def test_blocks_split_by_one_column():
    m = np.zeros((10, 20), bool)
    m[2:7, 2:7] = True
    m[2:7, 8:13] = True
    dets = extract_detections(m, NO_FILTER)
    assert len(dets) == len(flood_fill_components(m)) == 2


def test_diagonal_touch_is_connected():
    m = np.zeros((6, 6), bool)
    m[1, 1] = m[2, 2] = m[3, 3] = True
    assert len(extract_detections(m, NO_FILTER)) == 1


def test_sorted_by_area_descending():
    m = np.zeros((20, 40), bool)
    m[1:3, 1:3] = True
    m[5:15, 5:15] = True
    m[1:5, 20:25] = True
    areas = [d.area for d in extract_detections(m, NO_FILTER)]
    assert areas == [100, 20, 4]


def test_opening_removes_speckle_but_keeps_blob():
    m = np.zeros((30, 30), bool)
    m[10:20, 10:20] = True
    m[2, 2] = m[25, 4] = True
    dets = extract_detections(m, DetectionParams(min_blob_area=1))
    assert len(dets) == 1 and dets[0].bbox == (10, 10, 10, 10)


@given(masks, st.integers(1, 6))
def test_detections_match_flood_fill(mask, min_area):
    p = DetectionParams(morph_open_radius=0, min_blob_area=min_area)
    comps = [c for c in flood_fill_components(mask) if len(c) >= min_area]
    dets = extract_detections(mask, p)
    assert sorted(d.area for d in dets) == sorted(len(c) for c in comps)
    by_key = {}
    for c in comps:
        ys = [q[0] for q in c]
        xs = [q[1] for q in c]
        key = (min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1)
        by_key.setdefault(key, []).append((len(c), (sum(xs) / len(c), sum(ys) / len(c))))
    for d in dets:
        assert d.area >= min_area and d.area <= d.bbox[2] * d.bbox[3]
        assert (d.area, d.centroid) in by_key[d.bbox]
        x, y, w, h = d.bbox
        assert 0 <= x and 0 <= y and x + w <= mask.shape[1] and y + h <= mask.shape[0]


@given(masks)
def test_mirror_invariance(mask):
    p = DetectionParams(min_blob_area=2)
    a = extract_detections(mask, p)
    b = extract_detections(mask[:, ::-1], p)
    assert len(a) == len(b)
    assert sum(d.area for d in a) == sum(d.area for d in b)
    w = mask.shape[1]
    mirrored = sorted((w - d.bbox[0] - d.bbox[2], d.bbox[1], d.bbox[2], d.bbox[3]) for d in a)
    assert mirrored == sorted(d.bbox for d in b)


# --- full detector ---------------------------------------------------------

def _soil(h=120, w=160):
    rng = np.random.default_rng(3)
    base = np.array([130, 100, 70])
    return np.clip(base + rng.integers(-15, 16, (h, w, 1)), 0, 255).astype(np.uint8)


def test_bare_soil_has_no_detections():
    assert detect(_soil()) == []


def test_green_disc_detected_at_center():
    img = _soil()
    yy, xx = np.mgrid[:120, :160]
    cx, cy = 71.3, 52.8
    img[(xx - cx) ** 2 + (yy - cy) ** 2 <= 100] = (40, 170, 50)
    (d,) = detect(img)
    assert abs(d.centroid[0] - cx) <= 1 and abs(d.centroid[1] - cy) <= 1


@given(images)
def test_detect_is_segment_then_extract(img):
    p = DetectionParams(min_blob_area=1, exg_min=0)
    assert detect(img, p) == extract_detections(segment(img, p), p)
