"""Plant-level scoring of a detection pass against the manual plant count.

Precision is TP / (TP + FP). Recall divides by the number of plants in the
transect, not by per-frame misses: a plant counts once, as soon as any
frame detects it.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .camera import FrameGeometry, GroundTruthPlant, Species
from .imaging import Detection


class UndefinedMetricError(ValueError):
    """Raised when a ratio has a zero denominator."""


@dataclass(frozen=True)
class MatchCriteria:
    center_tolerance: float = 0.05  # m beyond the plant radius
    one_hit_suffices: bool = True

    def __post_init__(self):
        if self.center_tolerance < 0:
            raise ValueError("center_tolerance must be >= 0")


@dataclass
class ConfusionTally:
    true_positives: int = 0
    false_positives: int = 0
    total_weeds: int = 0
    per_species: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.true_positives <= self.total_weeds:
            raise ValueError("need 0 <= true_positives <= total_weeds")
        if self.false_positives < 0:
            raise ValueError("false_positives must be >= 0")
        if self.per_species and sum(t for _, t in self.per_species.values()) != self.total_weeds:
            raise ValueError("per-species totals must sum to total_weeds")


def _nan_to_none(obj):
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_nan_to_none(v) for v in obj]
    return obj


@dataclass
class EvalReport:
    precision: float
    recall: float
    recall_by_species: dict[str, float]
    speed: float
    camera: str
    tally: ConfusionTally

    def to_json(self) -> str:
        """JSON text; undefined metrics (NaN) become null."""
        return json.dumps(_nan_to_none(asdict(self)), indent=2, sort_keys=True, allow_nan=False)


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    n: int = 0


def precision(tally: ConfusionTally) -> float:
    emitted = tally.true_positives + tally.false_positives
    if emitted == 0:
        raise UndefinedMetricError("precision is undefined: no detections were made")
    return tally.true_positives / emitted


def recall(tally: ConfusionTally) -> float:
    if tally.total_weeds == 0:
        raise UndefinedMetricError("recall is undefined: the transect has no weeds")
    return tally.true_positives / tally.total_weeds


def recall_by_species(tally: ConfusionTally) -> dict[str, float]:
    """Detected / present for each species that is present at all."""
    return {sp: hit / tot for sp, (hit, tot) in sorted(tally.per_species.items()) if tot > 0}


def _check_frame(dets: Sequence[Detection], geom: FrameGeometry, frame_shape=None):
    if frame_shape is not None and tuple(frame_shape[:2]) != (geom.height, geom.width):
        raise ValueError(f"frame is {tuple(frame_shape[:2])} but its geometry says "
                         f"{(geom.height, geom.width)}")
    for d in dets:
        x, y, w, h = d.bbox
        if x < 0 or y < 0 or x + w > geom.width or y + h > geom.height:
            raise ValueError(f"detection {d.bbox} falls outside a {geom.width}x{geom.height} frame")


def match_frame(dets: Sequence[Detection], geom: FrameGeometry, plants: Sequence[GroundTruthPlant],
                criteria: MatchCriteria = MatchCriteria()) -> tuple[set[int], int]:
    """Match one frame's detections: (ids of plants hit, number of false positives).

    A detection hits a plant when its ground-projected centroid lies within
    the plant radius plus tolerance; with several candidates the nearest
    centre wins. Extra detections on an already-hit plant are ignored.
    """
    _check_frame(dets, geom)
    if not dets:
        return set(), 0
    if not plants:
        return set(), len(dets)
    cx = np.array([d.centroid[0] for d in dets])
    cy = np.array([d.centroid[1] for d in dets])
    gx, gy = geom.to_ground(cx, cy)
    centers = np.array([p.center for p in plants])
    reach = np.array([p.radius_m for p in plants]) + criteria.center_tolerance
    dist = np.hypot(gx[:, None] - centers[None, :, 0], gy[:, None] - centers[None, :, 1])
    ok = dist <= reach[None, :]
    hits: set[int] = set()
    fp = 0
    for i in range(len(dets)):
        cand = np.flatnonzero(ok[i])
        if len(cand) == 0:
            fp += 1
        else:
            hits.add(plants[int(cand[np.argmin(dist[i, cand])])].id)
    return hits, fp


def merge_tallies(parts: Iterable[tuple[set[int], int]], plants: Sequence[GroundTruthPlant]) -> ConfusionTally:
    """Union the per-frame hit sets and sum the false positives."""
    hit: set[int] = set()
    fp = 0
    for h, f in parts:
        hit |= h
        fp += f
    per: dict[str, list[int]] = {}
    for p in plants:
        entry = per.setdefault(Species(p.species).value, [0, 0])
        entry[1] += 1
        entry[0] += p.id in hit
    known = {p.id for p in plants}
    tp = len(hit & known)
    return ConfusionTally(tp, fp, len(plants), {k: (v[0], v[1]) for k, v in per.items()})


def match_detections(detections: Sequence[Sequence[Detection]], geometry: Sequence[FrameGeometry],
                     plants: Sequence[GroundTruthPlant], criteria: MatchCriteria = MatchCriteria(),
                     frames: Sequence[np.ndarray] | None = None) -> ConfusionTally:
    """Score a whole pass; ``detections[k]`` belongs to the frame with ``geometry[k]``.

    Pass ``frames`` to have their shapes checked against the geometry.
    """
    if len(detections) != len(geometry):
        raise ValueError("need exactly one geometry per frame of detections")
    if frames is not None:
        if len(frames) != len(geometry):
            raise ValueError("need exactly one geometry per frame")
        for fr, g in zip(frames, geometry):
            _check_frame((), g, np.shape(fr))
    parts = (match_frame(d, g, plants, criteria) for d, g in zip(detections, geometry))
    return merge_tallies(parts, plants)


def build_report(tally: ConfusionTally, speed: float, camera: str) -> EvalReport:
    try:
        prec = precision(tally)
    except UndefinedMetricError:
        prec = math.nan
    try:
        rec = recall(tally)
    except UndefinedMetricError:
        rec = math.nan
    return EvalReport(prec, rec, recall_by_species(tally), speed, camera, tally)


def fit_recall_vs_speed(points: Sequence[tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares of recall (%) on speed (km/h)."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    x, y = pts[:, 0], pts[:, 1]
    if len(pts) < 2 or np.all(x == x[0]):
        raise ValueError("need at least two distinct speeds to fit a line")
    xm, ym = x.mean(), y.mean()
    dx = x - xm
    slope = float(np.dot(dx, y - ym) / np.dot(dx, dx))
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    if ss_tot == 0.0:
        r2 = 0.0
    else:
        ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RegressionFit(slope, intercept, r2, len(pts))


# ---------------------------------------------------------------------------
# file formats

GROUND_TRUTH_HEADER = ["id", "species", "x_m", "y_m", "diameter_mm"]
REPORT_CSV_HEADER = ["camera", "speed", "precision", "recall", "recall_broadleaf", "recall_grass"]


def write_ground_truth(path: str | Path, plants: Sequence[GroundTruthPlant]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GROUND_TRUTH_HEADER)
        for p in plants:
            w.writerow([p.id, Species(p.species).value, f"{p.center[0]:.6f}", f"{p.center[1]:.6f}",
                        f"{p.diameter:.3f}"])


def read_ground_truth(path: str | Path) -> list[GroundTruthPlant]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != GROUND_TRUTH_HEADER:
            raise ValueError(f"{path}: expected header {GROUND_TRUTH_HEADER}, got {reader.fieldnames}")
        return [GroundTruthPlant(int(r["id"]), Species(r["species"]), (float(r["x_m"]), float(r["y_m"])),
                                 float(r["diameter_mm"])) for r in reader]


def fmt(value: float) -> str:
    return "nan" if value is None or (isinstance(value, float) and math.isnan(value)) else f"{value:.6f}"


def report_csv_row(report: EvalReport) -> list[str]:
    rs = report.recall_by_species
    return [report.camera, f"{report.speed:g}", fmt(report.precision), fmt(report.recall),
            fmt(rs.get("broadleaf", math.nan)), fmt(rs.get("grass", math.nan))]
