import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from weedspeed.camera import (BUILTIN_PROFILES, CameraProfile, FrameGeometry, SceneSpec, Shutter, Species,
                              apply_motion_blur, apply_rolling_shutter, apply_sensor_model,
                              blur_kernel_length, frame_count, get_profile, plant_patch, render_pass,
                              rolling_shutter_shifts, synthesize_scene)
from weedspeed.imaging import DetectionParams, segment

images = arrays(np.uint8, st.tuples(st.integers(1, 30), st.integers(2, 60), st.just(3)))
SMALL = SceneSpec(transect_length=2.0, rng_seed=4)


def _rolling(readout, **kw):
    return CameraProfile("T", 64, 48, 2.4, Shutter.ROLLING, 0.004, readout, **kw)


# --- profiles --------------------------------------------------------------

def test_builtin_profiles_carry_camera_table():
    table = {"V2": (416, 320, 1.25, "rolling"), "HQ1": (640, 480, 2.40, "rolling"),
             "HQ2": (416, 320, 2.40, "rolling"), "ARD": (416, 320, 9.00, "global")}
    for name, (w, h, area, shutter) in table.items():
        p = BUILTIN_PROFILES[name]
        assert (p.sensor_width, p.sensor_height, p.pixel_area, p.shutter.value) == (w, h, area, shutter)
    assert BUILTIN_PROFILES["HQ1"].exposure_time == 0.012 and BUILTIN_PROFILES["HQ1"].brightness_gain == 1.6
    assert BUILTIN_PROFILES["HQ2"].exposure_time == 0.004 == BUILTIN_PROFILES["V2"].exposure_time
    assert BUILTIN_PROFILES["ARD"].row_readout_time == 0


def test_noise_sigma_ratio_between_small_and_large_pixels():
    ratio = BUILTIN_PROFILES["V2"].noise_sigma / BUILTIN_PROFILES["ARD"].noise_sigma
    assert ratio == pytest.approx(math.sqrt(9.00 / 1.25)) and round(ratio, 3) == 2.683
    assert BUILTIN_PROFILES["V2"].noise_sigma == pytest.approx(10.733, abs=1e-3)
    assert BUILTIN_PROFILES["ARD"].noise_sigma == pytest.approx(4.0)


@pytest.mark.parametrize("kw", [dict(pixel_area=0), dict(exposure_time=0), dict(row_readout_time=-1e-6),
                                dict(shutter="global", row_readout_time=1e-5), dict(sensor_width=0)])
def test_profile_validation(kw):
    base = dict(name="X", sensor_width=10, sensor_height=10, pixel_area=1.0, shutter="rolling",
                exposure_time=0.01, row_readout_time=1e-5)
    with pytest.raises(ValueError):
        CameraProfile(**{**base, **kw})


def test_unknown_profile():
    with pytest.raises(KeyError):
        get_profile("NOPE")


def test_profile_from_mapping_overrides_base():
    p = CameraProfile.from_mapping("FAST", {"exposure_time": 0.001}, BUILTIN_PROFILES["HQ2"])
    assert p.name == "FAST" and p.exposure_time == 0.001 and p.pixel_area == 2.40
    with pytest.raises(ValueError):
        CameraProfile.from_mapping("X", {"iso": 100}, BUILTIN_PROFILES["HQ2"])


# --- scene synthesis -------------------------------------------------------

def test_zero_density_is_bare_soil():
    img, plants = synthesize_scene(replace(SMALL, plant_density=0))
    assert plants == []
    assert not segment(img, DetectionParams()).any()


def test_synthesis_is_deterministic():
    a, pa = synthesize_scene(SMALL)
    b, pb = synthesize_scene(SMALL)
    np.testing.assert_array_equal(a, b)
    assert pa == pb
    c, _ = synthesize_scene(replace(SMALL, rng_seed=5))
    assert not np.array_equal(a, c)


def test_poisson_plant_count_mean():
    # the count is the first draw of each seed's stream, so the mean can be checked cheaply
    spec = SceneSpec()
    counts = [np.random.default_rng(seed).poisson(spec.plant_density * 25 * 1) for seed in range(1000)]
    assert abs(np.mean(counts) - 75) <= 3
    for seed in (0, 1, 2):
        _, plants = synthesize_scene(SceneSpec(rng_seed=seed, margin=1.5))
        assert len(plants) == counts[seed]


def test_plants_do_not_overlap_and_lie_in_transect():
    _, plants = synthesize_scene(SceneSpec(transect_length=5, rng_seed=9))
    for i, p in enumerate(plants):
        assert 0 <= p.center[0] <= 5 and 0 <= p.center[1] <= 1
        for q in plants[:i]:
            d = math.hypot(p.center[0] - q.center[0], p.center[1] - q.center[1])
            assert d >= p.radius_m + q.radius_m - 1e-12


def test_overcrowded_scene_raises(monkeypatch):
    import weedspeed.camera as cam

    monkeypatch.setattr(cam, "MAX_PLACEMENT_ATTEMPTS", 20_000)
    with pytest.raises(ValueError):
        synthesize_scene(SceneSpec(transect_length=0.2, transect_width=0.2, plant_density=5000, margin=0.0))


def test_species_mix_extremes():
    _, plants = synthesize_scene(replace(SMALL, species_mix=1.0))
    assert plants and all(p.species is Species.BROADLEAF for p in plants)
    _, plants = synthesize_scene(replace(SMALL, species_mix=0.0))
    assert all(p.species is Species.GRASS for p in plants)


def test_plant_colours_are_green_and_detectable():
    for seed in range(10):
        img, mask = plant_patch(Species.BROADLEAF, 120, seed)
        seg = segment(img)
        assert (seg & mask).sum() >= 0.9 * mask.sum()
        assert not (seg & ~mask).any()


# --- motion blur -----------------------------------------------------------

def test_kernel_length_example():
    assert blur_kernel_length(30, 0.005, 1000) == 42


@given(images)
def test_zero_speed_is_identity(img):
    np.testing.assert_array_equal(apply_motion_blur(img, 0, 0.01, 1000), img)


@given(images, st.floats(0, 40))
def test_motion_blur_keeps_shape_and_mean(img, speed):
    out = apply_motion_blur(img, speed, 0.004, 640)
    assert out.shape == img.shape and out.dtype == np.uint8
    assert np.all(np.abs(out.mean(axis=(0, 1)) - img.mean(axis=(0, 1))) <= 0.5)


def test_motion_blur_is_along_x_only():
    img = np.zeros((10, 40, 3), np.uint8)
    img[:, 20] = 200
    out = apply_motion_blur(img, 36, 0.001, 500)  # 10 m/s * 1 ms * 500 = 5 px
    assert (out[:, 20] > 0).all() and np.array_equal(out[0], out[5])
    assert np.count_nonzero(out[0, :, 0]) == 5


def test_negative_speed_rejected():
    with pytest.raises(ValueError):
        apply_motion_blur(np.zeros((4, 4, 3), np.uint8), -1, 0.01, 100)


# --- rolling shutter -------------------------------------------------------

def test_shift_example():
    p = _rolling(20e-6)
    shifts = rolling_shutter_shifts(301, 30.0, p, 1000)
    assert shifts[300] == 50


@given(images)
def test_global_or_zero_readout_is_identity(img):
    np.testing.assert_array_equal(apply_rolling_shutter(img, 30, BUILTIN_PROFILES["ARD"], 1000), img)
    np.testing.assert_array_equal(apply_rolling_shutter(img, 30, _rolling(0.0), 1000), img)


def test_rolling_shutter_translates_rows():
    img = np.zeros((20, 50, 3), np.uint8)
    img[:, 30] = 255
    out = apply_rolling_shutter(img, 36, _rolling(1e-4), 1000)  # 1 px per row
    for y in range(20):
        assert np.flatnonzero(out[y, :, 0]).tolist() == [30 - y]
    assert np.array_equal(out[19, -1], img[19, -1])  # edge replicated


# --- sensor model ----------------------------------------------------------

@given(images)
def test_sensor_identity_case(img):
    p = CameraProfile("I", img.shape[1], img.shape[0], 2.0, "global", 0.01, noise_coefficient=0.0)
    np.testing.assert_array_equal(apply_sensor_model(img, p, 0), img)


def test_gain_clips():
    img = np.full((8, 8, 3), 200, np.uint8)
    p = CameraProfile("G", 8, 8, 2.0, "global", 0.01, brightness_gain=2.0, noise_coefficient=0.0)
    assert (apply_sensor_model(img, p, 0) == 255).all()


def test_sensor_noise_level_and_determinism():
    img = np.full((96, 128, 3), 120, np.uint8)
    p = CameraProfile("N", 64, 48, 1.25, "global", 0.01)
    a = apply_sensor_model(img, p, 7)
    np.testing.assert_array_equal(a, apply_sensor_model(img, p, 7))
    assert a.shape == (48, 64, 3)
    assert a.astype(float).std() == pytest.approx(p.noise_sigma, rel=0.05)
    assert abs(a.astype(float).mean() - 120) < 0.3


def test_bigger_pixels_mean_less_noise():
    img = np.full((48, 64, 3), 120, np.uint8)
    small = apply_sensor_model(img, replace(BUILTIN_PROFILES["V2"], sensor_width=64, sensor_height=48), 1)
    big = apply_sensor_model(img, replace(BUILTIN_PROFILES["ARD"], sensor_width=64, sensor_height=48), 1)
    assert small.std() > 2 * big.std()


# --- render pass -----------------------------------------------------------

def test_frame_count_examples():
    assert frame_count(25, 30, 30) == 91
    assert frame_count(25, 5, 30) == math.floor(25 / (5 / 3.6 / 30)) + 1


def test_render_pass_frames_and_ground_truth():
    img, plants = synthesize_scene(SMALL)
    prof = BUILTIN_PROFILES["HQ2"]
    seq = render_pass(img, plants, SMALL, prof, 10.0, fps=20, fov_length=1.3, rng_seed=3)
    assert len(seq) == frame_count(2.0, 10.0, 20) and seq.fps == 20
    assert seq.spacing == pytest.approx(10 / 3.6 / 20)
    ids = {p.id for p in plants}
    seen = set()
    for fr, gt, g in zip(seq.frames, seq.frame_ground_truth, seq.geometry):
        assert fr.shape == (prof.sensor_height, prof.sensor_width, 3)
        for pid, cx, cy in gt:
            assert pid in ids
            seen.add(pid)
            x, y = g.to_ground(cx, cy)
            p = next(q for q in plants if q.id == pid)
            assert x == pytest.approx(p.center[0]) and y == pytest.approx(p.center[1])
    assert seen == ids  # fov_length >= spacing, so the windows tile the transect


def test_render_pass_is_deterministic():
    img, plants = synthesize_scene(SMALL)
    a = render_pass(img, plants, SMALL, BUILTIN_PROFILES["V2"], 15.0, rng_seed=1)
    b = render_pass(img, plants, SMALL, BUILTIN_PROFILES["V2"], 15.0, rng_seed=1)
    assert all(np.array_equal(x, y) for x, y in zip(a.frames, b.frames))


def test_window_outside_scene_rejected():
    spec = replace(SMALL, margin=0.1)
    img, plants = synthesize_scene(spec)
    with pytest.raises(ValueError):
        render_pass(img, plants, spec, BUILTIN_PROFILES["HQ2"], 10.0, fov_length=1.3)


@pytest.mark.parametrize("kw", [dict(fps=0), dict(fov_length=-1.0)])
def test_render_pass_preconditions(kw):
    img, plants = synthesize_scene(SMALL)
    with pytest.raises(ValueError):
        render_pass(img, plants, SMALL, BUILTIN_PROFILES["HQ2"], 10.0, **kw)
    with pytest.raises(ValueError):
        render_pass(img, plants, SMALL, BUILTIN_PROFILES["HQ2"], 0.0)


@given(st.floats(-2, 3), st.floats(0, 1), st.floats(0, 1e-3))
def test_geometry_round_trip(x, y, skew):
    g = FrameGeometry(origin_x=0.3, px_per_m_x=320.0, px_per_m_y=320.0, width=416, height=320,
                      skew_m_per_row=skew)
    cx, cy = g.to_pixel(x, y)
    gx, gy = g.to_ground(cx, cy)
    assert gx == pytest.approx(x, abs=1e-9) and gy == pytest.approx(y, abs=1e-9)


def test_grass_loses_more_pixels_to_blur_than_broadleaf():
    # paired plants of equal diameter; one-sided sign test at the 5% level
    assert blur_kernel_length(20.0, 0.004, 640) >= 10
    wins = 0
    n = 50
    for seed in range(n):
        frac = []
        for sp in (Species.GRASS, Species.BROADLEAF):
            img, mask = plant_patch(sp, 130.0, seed)
            blurred = apply_motion_blur(img, 20.0, 0.004, 640)
            frac.append((segment(blurred) & mask).sum() / mask.sum())
        wins += frac[0] < frac[1]
    # P(X >= 32 | n=50, p=0.5) = 0.032
    assert wins >= 32, wins
