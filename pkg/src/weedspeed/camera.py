"""Synthetic fallow transects and a parametric camera that films them at speed.

Ground coordinates are metres: x runs along the direction of travel
(0 at the start of the transect), y across it. Scene rasters carry a
bare-soil apron of ``SceneSpec.margin`` metres before and after the
transect so that a camera window, and the blur/skew context around it,
never runs off the image. The travel axis is the image x axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Iterator

import numpy as np

from . import kernels
from .timeline import KMH_PER_MPS

MAX_PLACEMENT_ATTEMPTS = 1_000_000


class Species(str, Enum):
    BROADLEAF = "broadleaf"
    GRASS = "grass"


class Shutter(str, Enum):
    ROLLING = "rolling"
    GLOBAL = "global"


@dataclass(frozen=True)
class CameraProfile:
    name: str
    sensor_width: int
    sensor_height: int
    pixel_area: float  # um^2
    shutter: Shutter
    exposure_time: float  # s
    row_readout_time: float = 0.0  # s per sensor row
    brightness_gain: float = 1.0
    noise_coefficient: float = 12.0  # sigma = k / sqrt(pixel_area), 8-bit levels
    fps: float = 30.0

    def __post_init__(self):
        object.__setattr__(self, "shutter", Shutter(self.shutter))
        if self.sensor_width < 1 or self.sensor_height < 1:
            raise ValueError("sensor dimensions must be >= 1")
        if self.pixel_area <= 0:
            raise ValueError("pixel_area must be > 0")
        if self.exposure_time <= 0:
            raise ValueError("exposure_time must be > 0")
        if self.row_readout_time < 0:
            raise ValueError("row_readout_time must be >= 0")
        if self.shutter is Shutter.GLOBAL and self.row_readout_time != 0:
            raise ValueError("a global shutter has no row readout delay")
        if self.brightness_gain <= 0 or self.noise_coefficient < 0 or self.fps <= 0:
            raise ValueError("gain and fps must be > 0, noise_coefficient >= 0")

    @property
    def noise_sigma(self) -> float:
        return self.noise_coefficient / math.sqrt(self.pixel_area)

    @property
    def aspect(self) -> float:
        return self.sensor_width / self.sensor_height

    @classmethod
    def from_mapping(cls, name: str, data: dict, base: "CameraProfile | None" = None) -> "CameraProfile":
        known = {f.name for f in fields(cls)} - {"name"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown camera profile keys for {name}: {sorted(unknown)}")
        if base is not None:
            return replace(base, name=name, **data)
        return cls(name=name, **data)


ROLLING_ROW_READOUT = 30e-6

# Sensor geometry and shutter type follow each camera model.
# Exposure, gain, readout and frame rate are modelling assumptions: the
# default-settings HQ camera exposes long and bright at a low frame rate,
# the tuned ones short. The large-pixel global-shutter camera gathers the
# same signal in proportionally less time.
TUNED_EXPOSURE = 0.004
BUILTIN_PROFILES: dict[str, CameraProfile] = {
    p.name: p
    for p in (
        CameraProfile("V2", 416, 320, 1.25, Shutter.ROLLING, TUNED_EXPOSURE, ROLLING_ROW_READOUT, 1.0, 12.0, 20.0),
        CameraProfile("HQ1", 640, 480, 2.40, Shutter.ROLLING, 0.012, ROLLING_ROW_READOUT, 1.6, 12.0, 5.0),
        CameraProfile("HQ2", 416, 320, 2.40, Shutter.ROLLING, TUNED_EXPOSURE, ROLLING_ROW_READOUT, 1.0, 12.0, 20.0),
        CameraProfile("ARD", 416, 320, 9.00, Shutter.GLOBAL, TUNED_EXPOSURE * 2.40 / 9.00, 0.0, 1.0, 12.0, 20.0),
    )
}


def get_profile(name: str, extra: dict[str, CameraProfile] | None = None) -> CameraProfile:
    table = {**BUILTIN_PROFILES, **(extra or {})}
    try:
        return table[name]
    except KeyError:
        raise KeyError(f"unknown camera profile {name!r}; known: {sorted(table)}") from None


@dataclass(frozen=True)
class SceneSpec:
    transect_length: float = 25.0  # m
    transect_width: float = 1.0  # m
    ground_scale: float = 640.0  # px per m
    plant_density: float = 3.0  # plants per m^2
    species_mix: float = 0.5  # fraction broadleaf
    broadleaf_diameter: tuple[float, float] = (110.0, 40.0)  # mm, mean and sd
    grass_diameter: tuple[float, float] = (130.0, 50.0)
    grass_leaf_width: tuple[float, float] = (2.0, 4.0)  # mm
    plant_value: tuple[float, float] = (0.30, 0.55)
    soil_palette: tuple[tuple[int, int, int], tuple[int, int, int]] = ((95, 70, 50), (165, 125, 90))
    margin: float = 1.5  # m of bare soil before and after the transect
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("broadleaf_diameter", "grass_diameter", "grass_leaf_width", "plant_value"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "soil_palette", tuple(tuple(int(c) for c in rgb) for rgb in self.soil_palette))
        if self.transect_length <= 0 or self.transect_width <= 0 or self.ground_scale <= 0:
            raise ValueError("transect dimensions and ground_scale must be > 0")
        if self.plant_density < 0:
            raise ValueError("plant_density must be >= 0")
        if not 0.0 <= self.species_mix <= 1.0:
            raise ValueError("species_mix must lie in [0, 1]")
        for name in ("broadleaf_diameter", "grass_diameter"):
            mean, sd = getattr(self, name)
            if mean <= 0 or sd < 0:
                raise ValueError(f"{name} needs mean > 0 and sd >= 0")
        if min(self.grass_leaf_width) <= 0:
            raise ValueError("grass_leaf_width must be > 0")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width) of the scene raster."""
        return (round(self.transect_width * self.ground_scale),
                round((self.transect_length + 2 * self.margin) * self.ground_scale))

    @property
    def origin_px(self) -> int:
        """Raster column where the transect starts."""
        return round(self.margin * self.ground_scale)

    @classmethod
    def from_mapping(cls, data: dict) -> "SceneSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scene keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class GroundTruthPlant:
    id: int
    species: Species
    center: tuple[float, float]  # m
    diameter: float  # mm

    @property
    def radius_m(self) -> float:
        return self.diameter / 2000.0


# ---------------------------------------------------------------------------
# scene synthesis


def _lognormal(rng: np.random.Generator, mean: float, sd: float) -> float:
    if sd == 0:
        return mean
    s2 = math.log1p((sd / mean) ** 2)
    return float(rng.lognormal(math.log(mean) - s2 / 2, math.sqrt(s2)))


def _hsv_to_rgb_array(hue: float, sat: float, val: float) -> np.ndarray:
    import colorsys

    return np.array(colorsys.hsv_to_rgb(hue / 360.0, sat, val)) * 255.0


def _lerp_matrix(n: int, cell: int) -> np.ndarray:
    """(n, n // cell + 2) linear interpolation weights from a coarse grid of spacing ``cell``."""
    pos = np.arange(n) / cell
    i = np.floor(pos).astype(np.int64)
    f = (pos - i).astype(np.float32)
    m = np.zeros((n, n // cell + 2), dtype=np.float32)
    m[np.arange(n), i] = 1 - f
    m[np.arange(n), i + 1] += f
    return m


def _soil(shape: tuple[int, int], palette, rng: np.random.Generator) -> np.ndarray:
    """Bilinear mottle on a 24 px grid plus per-pixel grain, mapped onto the palette."""
    h, w = shape
    lo = np.array(palette[0], dtype=np.float32)
    hi = np.array(palette[1], dtype=np.float32)
    cell = 24
    coarse = rng.random((h // cell + 2, w // cell + 2), dtype=np.float32)
    mottle = _lerp_matrix(h, cell) @ (coarse @ _lerp_matrix(w, cell).T)
    t = rng.random((h, w), dtype=np.float32)
    t *= 0.35
    t += 0.65 * mottle
    img = np.empty((h, w, 3), dtype=np.uint8)
    for ch in range(3):
        img[..., ch] = np.rint(lo[ch] + t * (hi[ch] - lo[ch]))
    return img


def _plant_shape(species: Species, diameter_mm: float, spec: SceneSpec, rng: np.random.Generator):
    """Draw the random shape parameters of one plant (metres)."""
    d = diameter_mm / 1000.0
    if species is Species.BROADLEAF:
        n = int(rng.integers(4, 7))
        theta0 = rng.uniform(0, 2 * math.pi)
        lobes = []
        for i in range(n):
            th = theta0 + 2 * math.pi * i / n + rng.uniform(-0.3, 0.3)
            a = rng.uniform(0.22, 0.30) * d
            b = rng.uniform(0.15, 0.22) * d
            off = d / 2 - a
            lobes.append((off * math.cos(th), off * math.sin(th), th, a, b))
        return {"lobes": lobes, "core": 0.18 * d}
    n = int(rng.integers(3, 7))
    leaves = []
    for _ in range(n):
        th = rng.uniform(0, 2 * math.pi)
        width = rng.uniform(*spec.grass_leaf_width) / 1000.0
        leaves.append((th, width))
    return {"leaves": leaves, "length": d / 2}


def _plant_mask(species: Species, shape: dict, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Coverage of pixel centres at offsets (dx, dy) metres from the plant centre."""
    if species is Species.BROADLEAF:
        inside = np.broadcast_to(dx * dx + dy * dy <= shape["core"] ** 2,
                                 np.broadcast_shapes(dx.shape, dy.shape)).copy()
        for ox, oy, th, a, b in shape["lobes"]:
            c, s = math.cos(th), math.sin(th)
            u = (dx - ox) * c + (dy - oy) * s
            v = -(dx - ox) * s + (dy - oy) * c
            inside |= (u / a) ** 2 + (v / b) ** 2 <= 1.0
        return inside
    inside = np.zeros(np.broadcast_shapes(dx.shape, dy.shape), dtype=bool)
    length = shape["length"]
    for th, width in shape["leaves"]:
        c, s = math.cos(th), math.sin(th)
        t = np.clip(dx * c + dy * s, 0.0, length)
        ex = dx - t * c
        ey = dy - t * s
        inside |= ex * ex + ey * ey <= (width / 2) ** 2
    return inside


def _draw_plant(img: np.ndarray, species: Species, shape: dict, center_px: tuple[float, float],
                radius_m: float, color: np.ndarray, ground_scale: float, rng: np.random.Generator):
    h, w, _ = img.shape
    cx, cy = center_px
    rad = radius_m * ground_scale + 2
    x0, x1 = max(0, int(cx - rad)), min(w, int(cx + rad) + 2)
    y0, y1 = max(0, int(cy - rad)), min(h, int(cy + rad) + 2)
    if x0 >= x1 or y0 >= y1:
        return
    xs = (np.arange(x0, x1) + 0.5 - cx) / ground_scale
    ys = (np.arange(y0, y1) + 0.5 - cy) / ground_scale
    inside = _plant_mask(species, shape, xs[None, :], ys[:, None])
    shade = rng.uniform(0.9, 1.0, size=inside.shape)
    patch = img[y0:y1, x0:x1]
    leaf = np.rint(color[None, None, :] * shade[..., None]).clip(0, 255).astype(np.uint8)
    patch[inside] = leaf[inside]


def _appearance(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    hue = rng.uniform(70.0, 120.0)
    sat = rng.uniform(0.4, 0.9)
    val = rng.uniform(*spec.plant_value)
    return _hsv_to_rgb_array(hue, sat, val)


def synthesize_scene(spec: SceneSpec) -> tuple[np.ndarray, list[GroundTruthPlant]]:
    """Render a bare-soil transect sown at random with broadleaf and grass plants.

    The plant count is Poisson with mean density x area; plant discs do not
    overlap. Raises ValueError when the plants cannot be placed within
    ``MAX_PLACEMENT_ATTEMPTS`` random draws.
    """
    rng = np.random.default_rng(spec.rng_seed)
    L, W = spec.transect_length, spec.transect_width
    n = int(rng.poisson(spec.plant_density * L * W))
    image = _soil(spec.shape, spec.soil_palette, rng)

    plants: list[GroundTruthPlant] = []
    placed = np.empty((n, 3))
    attempts = 0
    for i in range(n):
        species = Species.BROADLEAF if rng.random() < spec.species_mix else Species.GRASS
        mean, sd = spec.broadleaf_diameter if species is Species.BROADLEAF else spec.grass_diameter
        diameter = _lognormal(rng, mean, sd)
        radius = diameter / 2000.0
        while True:
            attempts += 1
            if attempts > MAX_PLACEMENT_ATTEMPTS:
                raise ValueError(f"could not place {n} plants without overlap in "
                                 f"{MAX_PLACEMENT_ATTEMPTS} attempts; density too high")
            x, y = rng.uniform(0.0, L), rng.uniform(0.0, W)
            if i == 0:
                break
            prev = placed[:i]
            if np.all(np.hypot(prev[:, 0] - x, prev[:, 1] - y) >= prev[:, 2] + radius):
                break
        placed[i] = (x, y, radius)
        plants.append(GroundTruthPlant(i, species, (float(x), float(y)), float(diameter)))

    for plant in plants:
        shape = _plant_shape(plant.species, plant.diameter, spec, rng)
        color = _appearance(spec, rng)
        center_px = ((plant.center[0] + spec.margin) * spec.ground_scale,
                     plant.center[1] * spec.ground_scale)
        _draw_plant(image, plant.species, shape, center_px, plant.radius_m, color, spec.ground_scale, rng)
    return image, plants


def plant_patch(species: Species, diameter_mm: float, seed: int, spec: SceneSpec = SceneSpec(),
                size_m: float = 0.4) -> tuple[np.ndarray, np.ndarray]:
    """A single plant centred on a square soil patch, plus its exact coverage mask."""
    species = Species(species)
    rng = np.random.default_rng(seed)
    px = round(size_m * spec.ground_scale)
    image = _soil((px, px), spec.soil_palette, rng)
    shape = _plant_shape(species, diameter_mm, spec, rng)
    color = _appearance(spec, rng)
    _draw_plant(image, species, shape, (px / 2, px / 2), diameter_mm / 2000.0, color, spec.ground_scale, rng)
    xs = (np.arange(px) + 0.5 - px / 2) / spec.ground_scale
    mask = _plant_mask(species, shape, xs[None, :], xs[:, None])
    return image, mask


# ---------------------------------------------------------------------------
# degradations


def blur_kernel_length(speed_kmh: float, exposure_time: float, ground_scale: float) -> int:
    return int(round(speed_kmh / KMH_PER_MPS * exposure_time * ground_scale))


def apply_motion_blur(image, speed_kmh: float, exposure_time: float, ground_scale: float) -> np.ndarray:
    """Box-filter every row over the ground distance covered during the exposure.

    The kernel is normalised and wraps circularly at the left/right edges, so
    the image mean is kept up to rounding. Kernels of one pixel or less are
    the identity.
    """
    if speed_kmh < 0:
        raise ValueError("speed must be >= 0")
    image = np.asarray(image, dtype=np.uint8)
    length = blur_kernel_length(speed_kmh, exposure_time, ground_scale)
    if length <= 1:
        return image.copy()
    return kernels.box_blur_rows(image, length)


def rolling_shutter_shifts(n_rows: int, speed_kmh: float, profile: CameraProfile,
                           ground_scale: float) -> np.ndarray:
    if profile.shutter is Shutter.GLOBAL or profile.row_readout_time == 0 or speed_kmh == 0:
        return np.zeros(n_rows, dtype=np.int64)
    px_per_s = speed_kmh / KMH_PER_MPS * ground_scale
    return np.rint(px_per_s * np.arange(n_rows) * profile.row_readout_time).astype(np.int64)


def apply_rolling_shutter(image, speed_kmh: float, profile: CameraProfile, ground_scale: float) -> np.ndarray:
    """Skew rows as a rolling shutter does: row y is read ``y * row_readout_time`` late.

    By then the camera has moved on, so row y shows ground that lies
    ``shift`` pixels further along; that is, ``out[y, x] = in[y, x + shift]``
    with the last column replicated. A global shutter returns a copy.
    """
    image = np.asarray(image, dtype=np.uint8)
    shifts = rolling_shutter_shifts(image.shape[0], speed_kmh, profile, ground_scale)
    if not shifts.any():
        return image.copy()
    return kernels.shift_rows(image, shifts)


def area_resample(image: np.ndarray, height: int, width: int) -> np.ndarray:
    """Area-average an (H, W, 3) uint8 image to (height, width, 3) float64."""
    return kernels.area_resample(image, height, width)


def apply_sensor_model(image, profile: CameraProfile, rng_seed: int | np.random.SeedSequence) -> np.ndarray:
    """Resample to the sensor grid, apply gain (clipped), then Gaussian read noise."""
    image = np.asarray(image, dtype=np.uint8)
    out = area_resample(image, profile.sensor_height, profile.sensor_width)
    sigma = profile.noise_sigma
    noise = None
    if sigma > 0:
        noise = np.random.default_rng(rng_seed).standard_normal(out.shape, dtype=np.float32)
    return kernels.sensor_finish(out, profile.brightness_gain, noise, sigma)


# ---------------------------------------------------------------------------
# filming a pass


@dataclass(frozen=True)
class FrameGeometry:
    """Maps frame pixel coordinates to ground metres.

    Pixel (cx, cy) in index units, pixel centres at integers. Row ``cy`` of
    a rolling-shutter frame was read ``skew_m_per_row * (cy + 0.5)`` metres
    of travel after the top edge.
    """

    origin_x: float
    px_per_m_x: float
    px_per_m_y: float
    width: int
    height: int
    skew_m_per_row: float = 0.0
    origin_y: float = 0.0

    def to_ground(self, cx, cy):
        cx = np.asarray(cx, dtype=np.float64)
        cy = np.asarray(cy, dtype=np.float64)
        return (self.origin_x + (cx + 0.5) / self.px_per_m_x + self.skew_m_per_row * (cy + 0.5),
                self.origin_y + (cy + 0.5) / self.px_per_m_y)

    def to_pixel(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        cy = (y - self.origin_y) * self.px_per_m_y - 0.5
        cx = (x - self.origin_x - self.skew_m_per_row * (cy + 0.5)) * self.px_per_m_x - 0.5
        return cx, cy

    @property
    def length_m(self) -> float:
        return self.width / self.px_per_m_x


@dataclass
class Frame:
    index: int
    image: np.ndarray
    geometry: FrameGeometry
    ground_truth: list[tuple[int, float, float]]  # plant id, projected cx, cy


@dataclass
class FrameSequence:
    frames: list[np.ndarray]
    frame_ground_truth: list[list[tuple[int, float, float]]]
    geometry: list[FrameGeometry]
    speed: float  # km/h
    fps: float
    camera: str = ""
    spacing: float = field(init=False)

    def __post_init__(self):
        self.spacing = self.speed / KMH_PER_MPS / self.fps

    def __len__(self) -> int:
        return len(self.frames)


def frame_count(transect_length: float, speed_kmh: float, fps: float) -> int:
    spacing = speed_kmh / KMH_PER_MPS / fps
    return int(math.floor(transect_length / spacing + 1e-9)) + 1


def default_fov_length(profile: CameraProfile, transect_width: float) -> float:
    """Along-track footprint giving square pixels when the short side spans the transect."""
    return transect_width * profile.aspect


def iter_pass(scene: np.ndarray, plants: list[GroundTruthPlant], spec: SceneSpec,
              profile: CameraProfile, speed_kmh: float, fps: float | None = None,
              fov_length: float | None = None, rng_seed: int = 0) -> Iterator[Frame]:
    """Lazily film one pass over the transect; see :func:`render_pass`."""
    fps = profile.fps if fps is None else fps
    fov_length = default_fov_length(profile, spec.transect_width) if fov_length is None else fov_length
    if fps <= 0 or fov_length <= 0 or speed_kmh <= 0:
        raise ValueError("fps, fov_length and speed must all be > 0")
    scene = np.asarray(scene, dtype=np.uint8)
    G = spec.ground_scale
    scene_h, scene_w = scene.shape[:2]
    if (scene_h, scene_w) != spec.shape:
        raise ValueError(f"scene raster {scene.shape[:2]} does not match spec {spec.shape}")

    speed_mps = speed_kmh / KMH_PER_MPS
    spacing = speed_mps / fps
    n = frame_count(spec.transect_length, speed_kmh, fps)
    fov_px = round(fov_length * G)
    blur_len = blur_kernel_length(speed_kmh, profile.exposure_time, G)
    # readout time per scene row so that the full frame height takes as long as the sensor's rows
    scene_profile = replace(profile, row_readout_time=profile.row_readout_time * profile.sensor_height / scene_h)
    shifts = rolling_shutter_shifts(scene_h, speed_kmh, scene_profile, G)
    pad_left = blur_len // 2 + 1
    pad_right = blur_len // 2 + 1 + int(shifts.max(initial=0))

    ppm_x = profile.sensor_width / (fov_px / G)
    ppm_y = profile.sensor_height / (scene_h / G)
    skew = speed_mps * profile.row_readout_time if profile.shutter is Shutter.ROLLING else 0.0
    centers = np.array([p.center for p in plants], dtype=np.float64).reshape(-1, 2)
    ids = [p.id for p in plants]

    for k in range(n):
        c0 = spec.origin_px + int(round(k * spacing * G))
        if c0 < 0 or c0 + fov_px > scene_w:
            raise ValueError(f"frame {k} window [{c0}, {c0 + fov_px}) exceeds the scene raster "
                             f"width {scene_w}; enlarge the scene margin")
        e0, e1 = max(0, c0 - pad_left), min(scene_w, c0 + fov_px + pad_right)
        crop = scene[:, e0:e1]
        crop = apply_motion_blur(crop, speed_kmh, profile.exposure_time, G)
        crop = apply_rolling_shutter(crop, speed_kmh, scene_profile, G)
        window = crop[:, c0 - e0:c0 - e0 + fov_px]
        frame = apply_sensor_model(window, profile, np.random.SeedSequence((rng_seed, k)))

        geom = FrameGeometry(origin_x=c0 / G - spec.margin, px_per_m_x=ppm_x, px_per_m_y=ppm_y,
                             width=profile.sensor_width, height=profile.sensor_height,
                             skew_m_per_row=skew)
        gt = []
        if len(centers):
            inside = (centers[:, 0] >= geom.origin_x) & (centers[:, 0] < geom.origin_x + fov_px / G)
            sel = np.flatnonzero(inside)
            if len(sel):
                px, py = geom.to_pixel(centers[sel, 0], centers[sel, 1])
                gt = [(ids[j], float(a), float(b)) for j, a, b in zip(sel, px, py)]
        yield Frame(k, frame, geom, gt)


def render_pass(scene: np.ndarray, plants: list[GroundTruthPlant], spec: SceneSpec,
                profile: CameraProfile, speed_kmh: float, fps: float | None = None,
                fov_length: float | None = None, rng_seed: int = 0) -> FrameSequence:
    """Film the transect at ``speed_kmh``.

    Frame k looks at ground ``[k * spacing, k * spacing + fov_length)`` along
    track, where spacing = speed / fps, for ``floor(length / spacing) + 1``
    frames. Each window goes through motion blur, rolling-shutter skew and
    the sensor model in that order. ``fps`` and ``fov_length`` default to the
    profile frame rate and the footprint matching the sensor aspect ratio.
    Every frame lists the plants whose centres fall inside its window,
    with their projected pixel positions.
    """
    frames, gts, geoms = [], [], []
    fps = profile.fps if fps is None else fps
    for fr in iter_pass(scene, plants, spec, profile, speed_kmh, fps, fov_length, rng_seed):
        frames.append(fr.image)
        gts.append(fr.ground_truth)
        geoms.append(fr.geometry)
    return FrameSequence(frames, gts, geoms, speed_kmh, fps, profile.name)


def scene_geometry(spec: SceneSpec) -> FrameGeometry:
    """Geometry of the whole scene raster viewed as one static frame."""
    h, w = spec.shape
    return FrameGeometry(origin_x=-spec.origin_px / spec.ground_scale, px_per_m_x=spec.ground_scale,
                         px_per_m_y=spec.ground_scale, width=w, height=h)
