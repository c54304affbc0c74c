"""Compare the numba kernels with their numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--seconds 1.0] [--speed 10]

Frames are 416x320 renders of a synthetic transect. Every kernel and the
full detector are timed on both backends; the JIT is warmed up first.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from weedspeed import _accel, kernels
from weedspeed.camera import BUILTIN_PROFILES, SceneSpec, iter_pass, synthesize_scene
from weedspeed.imaging import DetectionParams, detect, segment


def _rate(fn, frames, seconds):
    fn(frames[0])
    n = 0
    t0 = time.perf_counter()
    while True:
        fn(frames[n % len(frames)])
        n += 1
        elapsed = time.perf_counter() - t0
        if elapsed >= seconds:
            return n / elapsed


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=float, default=1.0, help="time budget per measurement")
    ap.add_argument("--speed", type=float, default=10.0, help="ground speed of the rendered frames, km/h")
    args = ap.parse_args(argv)

    spec = SceneSpec(transect_length=3.0, rng_seed=1)
    scene, plants = synthesize_scene(spec)
    frames = [f.image for f in iter_pass(scene, plants, spec, BUILTIN_PROFILES["HQ2"], args.speed)]
    masks = [segment(f) for f in frames]
    big = [scene[:, i * 832:(i + 1) * 832] for i in range(3)]
    params = DetectionParams()
    rng = np.random.default_rng(0)
    noise = rng.standard_normal((320, 416, 3), dtype=np.float32)
    resampled = [kernels.area_resample(b, 320, 416) for b in big]

    cases = {
        "detect (segment + extract)": (lambda f: detect(f, params), frames),
        "segment": (lambda f: segment(f, params), frames),
        "binary_open r=1": (lambda m: kernels.binary_open(m, 1), masks),
        "label_components": (kernels.label_components, masks),
        "box_blur_rows L=21": (lambda f: kernels.box_blur_rows(f, 21), big),
        "area_resample 640->320": (lambda b: kernels.area_resample(b, 320, 416), big),
        "sensor_finish": (lambda r: kernels.sensor_finish(r, 1.0, noise, 7.7), resampled),
    }
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is timed")
    saved = kernels.USE_NUMBA
    print(f"{'kernel':28s} {'numba/s':>10s} {'numpy/s':>10s} {'speedup':>8s}")
    try:
        for name, (fn, data) in cases.items():
            rates = {}
            for flag in (True, False):
                if flag and not _accel.HAVE_NUMBA:
                    continue
                kernels.USE_NUMBA = flag
                rates[flag] = _rate(fn, data, args.seconds)
            nb = rates.get(True, float("nan"))
            print(f"{name:28s} {nb:10.1f} {rates[False]:10.1f} {nb / rates[False]:8.2f}")
    finally:
        kernels.USE_NUMBA = saved
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
