"""Camera x speed x replicate experiments over synthetic transects."""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .blur import DEFAULT_CUTOFF, fft_blur_score
from .camera import CameraProfile, SceneSpec, frame_count, get_profile, iter_pass, synthesize_scene
from .evaluation import (MatchCriteria, build_report, fit_recall_vs_speed, fmt, match_frame,
                         merge_tallies)
from .imaging import DetectionParams, detect

log = logging.getLogger(__name__)

DEFAULT_SPEEDS = (5.0, 10.0, 15.0, 20.0, 30.0)
RESULT_HEADER = ["camera", "speed", "replicate", "precision", "recall", "recall_broadleaf",
                 "recall_grass", "mean_blur", "status"]
REGRESSION_HEADER = ["camera", "species", "intercept", "slope", "r_squared", "n"]
BLUR_SAMPLES = 16


@dataclass(frozen=True)
class SweepConfig:
    profiles: tuple[str, ...] = ("V2", "HQ1", "HQ2", "ARD")
    speeds: tuple[float, ...] = DEFAULT_SPEEDS
    replicates: int = 6
    scene: SceneSpec = SceneSpec()
    detection: DetectionParams = DetectionParams()
    criteria: MatchCriteria = MatchCriteria()
    seed: int = 0
    blur_cutoff: float = DEFAULT_CUTOFF
    custom_profiles: dict[str, CameraProfile] = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "profiles", tuple(self.profiles))
        object.__setattr__(self, "speeds", tuple(float(s) for s in self.speeds))
        if not self.profiles or not self.speeds:
            raise ValueError("a sweep needs at least one profile and one speed")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if any(s <= 0 for s in self.speeds):
            raise ValueError("sweep speeds must be > 0")

    def replicate_seed(self, replicate: int) -> int:
        return self.seed * 1000 + replicate

    def profile(self, name: str) -> CameraProfile:
        return get_profile(name, self.custom_profiles)


@dataclass
class CellResult:
    camera: str
    speed: float
    replicate: int
    precision: float = math.nan
    recall: float = math.nan
    recall_broadleaf: float = math.nan
    recall_grass: float = math.nan
    mean_blur: float = math.nan
    status: str = "ok"
    n_frames: int = 0

    def row(self) -> list[str]:
        return [self.camera, f"{self.speed:g}", str(self.replicate), fmt(self.precision), fmt(self.recall),
                fmt(self.recall_broadleaf), fmt(self.recall_grass), fmt(self.mean_blur), self.status]


def _profile_key(name: str) -> int:
    # stable across runs, unlike hash()
    return int.from_bytes(name.encode()[:8].ljust(8, b"\0"), "little")


@lru_cache(maxsize=8)
def _scene(spec: SceneSpec):
    image, plants = synthesize_scene(spec)
    image.setflags(write=False)
    return image, tuple(plants)


def run_cell(config: SweepConfig, camera: str, speed: float, replicate: int) -> CellResult:
    """Film one replicate transect with one camera at one speed and score it."""
    profile = config.profile(camera)
    spec = replace(config.scene, rng_seed=config.replicate_seed(replicate))
    scene, plants = _scene(spec)
    noise_seed = int(np.random.SeedSequence(
        (config.seed, replicate, _profile_key(camera), int(round(speed * 1000)))).generate_state(1)[0])
    stride = max(1, frame_count(spec.transect_length, speed, profile.fps) // BLUR_SAMPLES)
    parts = []
    blur_scores = []
    n = 0
    for fr in iter_pass(scene, list(plants), spec, profile, speed, rng_seed=noise_seed):
        dets = detect(fr.image, config.detection)
        parts.append(match_frame(dets, fr.geometry, plants, config.criteria))
        if fr.index % stride == 0:
            blur_scores.append(fft_blur_score(fr.image, config.blur_cutoff).score)
        n += 1
    tally = merge_tallies(parts, plants)
    rep = build_report(tally, speed, camera)
    rs = rep.recall_by_species
    return CellResult(camera, speed, replicate, rep.precision, rep.recall,
                      rs.get("broadleaf", math.nan), rs.get("grass", math.nan),
                      float(np.mean(blur_scores)) if blur_scores else math.nan, "ok", n)


def _safe_cell(config, camera, speed, replicate) -> CellResult:
    try:
        return run_cell(config, camera, speed, replicate)
    except Exception as exc:  # noqa: BLE001 - a failed cell is reported, the sweep goes on
        log.error("cell %s %.1f km/h rep %d failed: %s", camera, speed, replicate, exc)
        return CellResult(camera, speed, replicate, status=f"error: {exc}")


def cells(config: SweepConfig):
    return [(c, s, r) for r in range(config.replicates) for c in config.profiles for s in config.speeds]


def run_sweep(config: SweepConfig, threads: int = 1, on_result=None) -> list[CellResult]:
    """Run every cell; results come back in canonical (camera, speed, replicate) order."""
    todo = cells(config)
    if threads <= 1:
        results = []
        for c in todo:
            res = _safe_cell(config, *c)
            results.append(res)
            if on_result:
                on_result(res)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_safe_cell, config, *c) for c in todo]
            results = []
            for f in futures:
                res = f.result()
                results.append(res)
                if on_result:
                    on_result(res)
    order = {name: i for i, name in enumerate(config.profiles)}
    results.sort(key=lambda r: (order[r.camera], r.speed, r.replicate))
    return results


def regressions(config: SweepConfig, results: list[CellResult]) -> list[list[str]]:
    """Recall (%) ~ speed per camera and species, over all replicate cells."""
    rows = []
    for camera in config.profiles:
        for species in ("broadleaf", "grass"):
            pts = [(r.speed, 100.0 * getattr(r, f"recall_{species}")) for r in results
                   if r.camera == camera and r.status == "ok" and not math.isnan(getattr(r, f"recall_{species}"))]
            try:
                fit = fit_recall_vs_speed(pts)
                rows.append([camera, species, f"{fit.intercept:.4f}", f"{fit.slope:.4f}",
                             f"{fit.r_squared:.4f}", str(fit.n)])
            except ValueError:
                rows.append([camera, species, "nan", "nan", "nan", str(len(pts))])
    return rows


def results_csv(results: list[CellResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in results:
        w.writerow(r.row())
    return buf.getvalue()


def regression_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REGRESSION_HEADER)
    w.writerows(rows)
    return buf.getvalue()
