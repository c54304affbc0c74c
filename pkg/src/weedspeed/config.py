"""TOML run configuration shared by the command-line tools.

Every section is optional; missing keys keep the library defaults. See
``data/reference.toml`` for a fully populated example.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

from .blur import DEFAULT_CUTOFF
from .camera import BUILTIN_PROFILES, CameraProfile, SceneSpec
from .evaluation import MatchCriteria
from .imaging import DetectionParams
from .sweep import DEFAULT_SPEEDS, SweepConfig
from .timeline import EventBudget, SprayGeometry

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SECTIONS = {"seed", "scene", "detection", "evaluation", "blur", "sweep", "budget", "geometry", "profiles"}


class ConfigError(ValueError):
    """A configuration file is unreadable or holds invalid values."""


@dataclass
class Config:
    seed: int = 0
    scene: SceneSpec = SceneSpec()
    detection: DetectionParams = DetectionParams()
    criteria: MatchCriteria = MatchCriteria()
    blur_cutoff: float = DEFAULT_CUTOFF
    profiles: tuple[str, ...] = ("V2", "HQ1", "HQ2", "ARD")
    speeds: tuple[float, ...] = DEFAULT_SPEEDS
    replicates: int = 6
    budget: EventBudget = EventBudget()
    geometry: SprayGeometry = SprayGeometry()
    custom_profiles: dict[str, CameraProfile] = field(default_factory=dict)

    def sweep_config(self, seed: int | None = None) -> SweepConfig:
        return SweepConfig(profiles=self.profiles, speeds=self.speeds, replicates=self.replicates,
                           scene=self.scene, detection=self.detection, criteria=self.criteria,
                           seed=self.seed if seed is None else seed, blur_cutoff=self.blur_cutoff,
                           custom_profiles=dict(self.custom_profiles))


def _tuples(value):
    if isinstance(value, list):
        return tuple(_tuples(v) for v in value)
    return value


def _section(data: dict, name: str) -> dict:
    sec = data.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    return {k: _tuples(v) for k, v in sec.items()}


def _only(sec: dict, allowed: set[str], name: str):
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")


def _profiles(data: dict) -> dict[str, CameraProfile]:
    out: dict[str, CameraProfile] = {}
    for name, body in _section(data, "profiles").items():
        if not isinstance(body, dict):
            raise ConfigError(f"[profiles.{name}] must be a table")
        body = dict(body)
        base_name = body.pop("base", None)
        base = None
        if base_name is not None:
            base = out.get(base_name) or BUILTIN_PROFILES.get(base_name)
            if base is None:
                raise ConfigError(f"[profiles.{name}] base {base_name!r} is not a known profile")
        elif name in BUILTIN_PROFILES:
            base = BUILTIN_PROFILES[name]
        out[name] = CameraProfile.from_mapping(name, body, base)
    return out


def from_mapping(data: dict) -> Config:
    """Build a Config from parsed TOML; raises ConfigError on bad keys or values."""
    unknown = set(data) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    try:
        cfg = Config(seed=int(data.get("seed", 0)))
        cfg.scene = SceneSpec.from_mapping(_section(data, "scene"))
        cfg.detection = DetectionParams.from_mapping(_section(data, "detection"))

        ev = _section(data, "evaluation")
        _only(ev, {f.name for f in fields(MatchCriteria)}, "evaluation")
        cfg.criteria = MatchCriteria(**ev)

        bl = _section(data, "blur")
        _only(bl, {"cutoff_radius_frac"}, "blur")
        cfg.blur_cutoff = float(bl.get("cutoff_radius_frac", DEFAULT_CUTOFF))
        if not 0 < cfg.blur_cutoff < 1:
            raise ConfigError("[blur] cutoff_radius_frac must lie in (0, 1)")

        sw = _section(data, "sweep")
        _only(sw, {"profiles", "speeds", "replicates"}, "sweep")
        cfg.profiles = tuple(sw.get("profiles", cfg.profiles))
        cfg.speeds = tuple(float(s) for s in sw.get("speeds", cfg.speeds))
        cfg.replicates = int(sw.get("replicates", cfg.replicates))

        bud = _section(data, "budget")
        _only(bud, set(EventBudget.stage_names()), "budget")
        cfg.budget = EventBudget(**bud)

        geo = _section(data, "geometry")
        _only(geo, {f.name for f in fields(SprayGeometry)}, "geometry")
        cfg.geometry = SprayGeometry(**geo)

        cfg.custom_profiles = _profiles(data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    known = set(BUILTIN_PROFILES) | set(cfg.custom_profiles)
    missing = [p for p in cfg.profiles if p not in known]
    if missing:
        raise ConfigError(f"[sweep] names unknown profiles {missing}; known: {sorted(known)}")
    # validate the sweep block eagerly so errors surface at load time
    try:
        cfg.sweep_config()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load(path: str | Path | None) -> Config:
    """Read a TOML file; ``None`` gives the defaults."""
    if path is None:
        return Config()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return from_mapping(data)


def reference_text() -> str:
    """The bundled reference configuration."""
    return resources.files("weedspeed").joinpath("data/reference.toml").read_text()
