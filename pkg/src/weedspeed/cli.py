"""weedspeed command line: synthesize, film, detect, score and budget.

Tabular output is CSV with a fixed header. Data go to ``--output`` (or
standard output); progress and diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import config as configmod
from ._accel import backend
from .blur import fft_blur_score
from .camera import FrameGeometry, Species, get_profile, iter_pass, synthesize_scene
from .evaluation import (REPORT_CSV_HEADER, build_report, match_detections, read_ground_truth,
                         report_csv_row, write_ground_truth)
from .imageio import draw_boxes, list_images, read_rgb, write_rgb
from .imaging import Detection, detect
from .sweep import regression_csv, regressions, results_csv, run_sweep
from .timeline import feasibility_report, max_ground_speed, sensitivity_table, KMH_PER_MPS

log = logging.getLogger("weedspeed")

DETECTION_HEADER = ["frame", "file", "x", "y", "w", "h", "cx", "cy", "area"]
BLUR_HEADER = ["path", "score", "cutoff", "status"]
FRAMES_HEADER = ["frame", "file", "origin_x", "origin_y", "px_per_m_x", "px_per_m_y", "width", "height",
                 "skew_m_per_row"]


class CliError(Exception):
    """An expected failure: reported on stderr with exit status 1."""


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        with open(output, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {output}: {exc.strerror or exc}") from exc


def _outdir(output: str | None, default: str) -> Path:
    d = Path(output or default)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {d}: {exc.strerror or exc}") from exc
    return d


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _scene_spec(cfg, args):
    return cfg.scene if args.seed is None else replace(cfg.scene, rng_seed=args.seed)


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args, cfg) -> int:
    spec = _scene_spec(cfg, args)
    image, plants = synthesize_scene(spec)
    out = _outdir(args.output, ".")
    scene_path = out / f"scene.{args.format}"
    try:
        write_rgb(scene_path, image)
        write_ground_truth(out / "ground_truth.csv", plants)
    except OSError as exc:
        raise CliError(f"cannot write scene files in {out}: {exc.strerror or exc}") from exc
    counts = {sp.value: sum(p.species == sp for p in plants) for sp in Species}
    print(f"plants {len(plants)} " + " ".join(f"{k} {v}" for k, v in counts.items()))
    log.info("wrote %s and %s", scene_path, out / "ground_truth.csv")
    return 0


def cmd_render(args, cfg) -> int:
    spec = _scene_spec(cfg, args)
    profile = get_profile(args.camera, cfg.custom_profiles)
    if args.scene:
        image = read_rgb(args.scene)
        plants = read_ground_truth(args.ground_truth) if args.ground_truth else []
    else:
        image, plants = synthesize_scene(spec)
    out = _outdir(args.output, "frames")
    rows = []
    for fr in iter_pass(image, plants, spec, profile, args.speed, args.fps, args.fov_length,
                        rng_seed=spec.rng_seed):
        name = f"frame_{fr.index:05d}.{args.format}"
        write_rgb(out / name, fr.image)
        g = fr.geometry
        rows.append([fr.index, name, f"{g.origin_x:.9f}", f"{g.origin_y:.9f}", f"{g.px_per_m_x:.9f}",
                     f"{g.px_per_m_y:.9f}", g.width, g.height, f"{g.skew_m_per_row:.12f}"])
    _emit(_csv(FRAMES_HEADER, rows), str(out / "frames.csv"))
    print(f"frames {len(rows)}")
    return 0


def cmd_detect(args, cfg) -> int:
    paths = list_images(args.input)
    if args.annotate:
        ann = _outdir(args.annotate, "annotated")
    rows = []
    for k, path in enumerate(paths):
        image = read_rgb(path)
        dets = detect(image, cfg.detection)
        for d in dets:
            x, y, w, h = d.bbox
            rows.append([k, path.name, x, y, w, h, f"{d.centroid[0]:.4f}", f"{d.centroid[1]:.4f}", d.area])
        if args.annotate:
            write_rgb(ann / (path.stem + ".png"), draw_boxes(image, dets))
    _emit(_csv(DETECTION_HEADER, rows), args.output)
    log.info("%d detections in %d images", len(rows), len(paths))
    return 0


def cmd_blur(args, cfg) -> int:
    rows = []
    for path in list_images(args.input):
        try:
            score = fft_blur_score(read_rgb(path), cfg.blur_cutoff)
            rows.append([str(path), f"{score.score:.6f}", f"{score.cutoff_radius_frac:g}", "ok"])
        except ValueError as exc:
            log.warning("skipping %s: %s", path, exc)
            rows.append([str(path), "nan", f"{cfg.blur_cutoff:g}", f"skipped: {exc}"])
    _emit(_csv(BLUR_HEADER, rows), args.output)
    return 0


def _read_csv(path: str, header: list[str]) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != header:
                raise CliError(f"{path}: expected header {header}, got {reader.fieldnames}")
            return list(reader)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def cmd_evaluate(args, cfg) -> int:
    frames = _read_csv(args.frames, FRAMES_HEADER)
    det_rows = _read_csv(args.detections, DETECTION_HEADER)
    plants = read_ground_truth(args.ground_truth)
    by_file: dict[str, list[Detection]] = {r["file"]: [] for r in frames}
    for r in det_rows:
        if r["file"] not in by_file:
            raise CliError(f"detection for unknown frame {r['file']!r}; not listed in {args.frames}")
        by_file[r["file"]].append(Detection((int(r["x"]), int(r["y"]), int(r["w"]), int(r["h"])),
                                            (float(r["cx"]), float(r["cy"])), int(r["area"])))
    geoms = [FrameGeometry(origin_x=float(r["origin_x"]), origin_y=float(r["origin_y"]),
                           px_per_m_x=float(r["px_per_m_x"]), px_per_m_y=float(r["px_per_m_y"]),
                           width=int(r["width"]), height=int(r["height"]),
                           skew_m_per_row=float(r["skew_m_per_row"])) for r in frames]
    tally = match_detections([by_file[r["file"]] for r in frames], geoms, plants, cfg.criteria)
    report = build_report(tally, args.speed, args.camera)
    _emit(report.to_json() + "\n", args.output)
    if args.csv:
        _emit(_csv(REPORT_CSV_HEADER, [report_csv_row(report)]), args.csv)
    return 0


def cmd_sweep(args, cfg) -> int:
    sweep = cfg.sweep_config(seed=args.seed)
    out = _outdir(args.output, "sweep")
    total = len(sweep.profiles) * len(sweep.speeds) * sweep.replicates
    done = []

    def progress(res):
        done.append(res)
        log.info("[%d/%d] %s %g km/h rep %d recall %.3f %s", len(done), total, res.camera, res.speed,
                 res.replicate, res.recall, res.status)

    try:
        results = run_sweep(sweep, threads=args.threads, on_result=progress)
    except BaseException:
        # keep what finished; the canonical order is restored on a full run
        _emit(results_csv(done), str(out / "results.partial.csv"))
        raise
    _emit(results_csv(results), str(out / "results.csv"))
    _emit(regression_csv(regressions(sweep, results)), str(out / "regression.csv"))
    failed = [r for r in results if r.status != "ok"]
    if failed:
        log.error("%d of %d sweep cells failed; see the status column", len(failed), len(results))
        return 1
    return 0


def cmd_budget(args, cfg) -> int:
    geom = cfg.geometry if args.fps is None else replace(cfg.geometry, fps=args.fps)
    try:
        vmax = max_ground_speed(cfg.budget, geom) * KMH_PER_MPS
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stage", "duration_s", "max_kmh_minus20", "max_kmh", "max_kmh_plus20"])
    for row in sensitivity_table(cfg.budget, geom, 0.2):
        w.writerow([row["stage"], f"{row['duration_s']:.6f}", f"{row['max_kmh_minus']:.4f}",
                    f"{row['max_kmh_base']:.4f}", f"{row['max_kmh_plus']:.4f}"])
    w.writerow([])
    w.writerow(["speed_kmh", "slack_s", "frames_per_weed", "capture_gap", "feasible"])
    for v in args.speed or sorted(set(cfg.speeds)):
        f = feasibility_report(cfg.budget, geom, v)
        w.writerow([f"{v:g}", f"{f.slack:.6f}", f"{f.frames_per_weed:.4f}", str(f.capture_gap).lower(),
                    str(f.feasible).lower()])
    _emit(buf.getvalue(), args.output)
    log.info("maximum ground speed %.2f km/h", vmax)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return value
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML configuration (defaults if omitted)")
    common.add_argument("--seed", type=int, metavar="N", help="override the configured seed")
    common.add_argument("--output", "-o", metavar="PATH", help="output file or directory")
    common.add_argument("--threads", type=_positive(int), default=1, metavar="N",
                        help="worker threads for sweeps (default 1)")
    common.add_argument("--verbose", "-v", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="weedspeed", description=__doc__.splitlines()[0])
    p.add_argument("--print-config", action="store_true", help="print the reference configuration and exit")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    s = sub.add_parser("synth", parents=[common], help="synthesize a transect scene and its ground truth")
    s.add_argument("--format", choices=["png", "ppm"], default="png")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("render", parents=[common], help="film a transect with a camera at a speed")
    s.add_argument("--camera", default="HQ2", help="profile name (default HQ2)")
    s.add_argument("--speed", type=_positive(float), required=True, help="ground speed in km/h")
    s.add_argument("--fps", type=_positive(float), help="frame rate (default: the profile's)")
    s.add_argument("--fov-length", type=_positive(float), help="along-track footprint in m")
    s.add_argument("--scene", help="scene raster from `synth` (synthesized from the config if omitted)")
    s.add_argument("--ground-truth", help="ground-truth CSV matching --scene")
    s.add_argument("--format", choices=["png", "ppm"], default="png")
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("detect", parents=[common], help="detect green plants in an image or frame directory")
    s.add_argument("input", help="image file or directory of frames")
    s.add_argument("--annotate", metavar="DIR", help="also write copies with red boxes drawn")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("blur", parents=[common], help="FFT blur score of an image or directory")
    s.add_argument("input", help="image file or directory")
    s.set_defaults(func=cmd_blur)

    s = sub.add_parser("evaluate", parents=[common], help="score detections against ground truth")
    s.add_argument("--detections", required=True, help="CSV written by `detect`")
    s.add_argument("--frames", required=True, help="frames.csv written by `render`")
    s.add_argument("--ground-truth", required=True, help="ground-truth CSV")
    s.add_argument("--speed", type=float, default=float("nan"), help="km/h, recorded in the report")
    s.add_argument("--camera", default="", help="profile name, recorded in the report")
    s.add_argument("--csv", metavar="PATH", help="also write the flat report row here")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", parents=[common], help="camera x speed x replicate experiment")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("budget", parents=[common], help="latency budget, sensitivity and feasibility")
    s.add_argument("--speed", type=_positive(float), action="append",
                   help="speed to check in km/h (repeatable; default: the sweep speeds)")
    s.add_argument("--fps", type=_positive(float), help="override the geometry frame rate")
    s.set_defaults(func=cmd_budget)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        sys.stdout.write(configmod.reference_text())
        return 0
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        print("weedspeed: error: a command is required", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    log.info("kernel backend: %s", backend())
    try:
        cfg = configmod.load(args.config)
        return args.func(args, cfg)
    except (CliError, configmod.ConfigError, FileNotFoundError) as exc:
        print(f"weedspeed: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"weedspeed: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
