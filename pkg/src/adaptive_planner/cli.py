"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import yaml

from . import io, svg
from .config import ConfigError, RunConfig, WorldSpec, load_config
from .detect.calibration import TARGET_F1, fit_profile, image_trials
from .evaluation.experiments import (
    DISTRIBUTIONS,
    ROW_FIELDS,
    SWEEP_KEYS,
    Scenario,
    SweepGrid,
    aggregate,
    best_cell,
    crossover_density,
    density_curves,
    density_tasks,
    experiment_certainty_separability,
    localization_tasks,
    make_world,
    run_tasks,
    sweep_tasks,
)
from .evaluation.metrics import f1, relative_length
from .sim.errors import LEVEL_NAMES
from .sim.mission import run_mission
from .sim.worlds import PlacementError

log = logging.getLogger("adaptive_planner")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

SUMMARY_FIELDS = (
    "distribution",
    "planner",
    "h_cov",
    "c_accept",
    "c_reject",
    "level",
    "density",
    "f1_mean",
    "f1_sd",
    "r_diff_mean",
    "r_diff_sd",
    "runs",
    "degenerate",
)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML run configuration; flags override it")
    parser.add_argument("--field", help="field polygon GeoJSON (default: 100 m x 75 m rectangle)")
    parser.add_argument("--profile", help="detector profile YAML (default: shipped calibration)")
    parser.add_argument("--seed", type=int, help="base random seed")
    parser.add_argument("--out", help="output directory")


def _planner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--h-cov", type=float, help="coverage altitude in m")
    parser.add_argument("--h-inspect", type=float, help="inspection altitude in m")
    parser.add_argument("--c-accept", type=float, help="accept objects above this certainty")
    parser.add_argument("--c-reject", type=float, help="reject objects below this certainty")
    parser.add_argument("--measure", dest="certainty_measure", help="certainty measure used for decisions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptive-planner", description="Adaptive UAV path planning simulator and experiment harness."
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    gw = sub.add_parser("gen-world", help="generate a ground-truth object layout")
    gw.add_argument("--dist", choices=DISTRIBUTIONS, required=True)
    gw.add_argument("--n", type=int, required=True, help="number of objects")
    gw.add_argument("--seed", type=int, default=0)
    gw.add_argument("--field", help="field polygon GeoJSON")
    gw.add_argument("--out", default="world.geojson", help="output GeoJSON path")

    run = sub.add_parser("run", help="fly one mission")
    _common(run)
    _planner_flags(run)
    run.add_argument("--planner", choices=("adaptive", "coverage"), default="adaptive")
    run.add_argument("--world", help="world GeoJSON (default: generated from the config)")
    run.add_argument("--dist", choices=DISTRIBUTIONS, help="distribution of a generated world")
    run.add_argument("--n", type=int, help="object count of a generated world")
    run.add_argument("--level", choices=LEVEL_NAMES, help="localization error level")

    ex = sub.add_parser("experiment", help="run one of the four experiments")
    ex.add_argument("name", choices=("certainty", "sweep", "localization", "density"))
    _common(ex)
    _planner_flags(ex)
    ex.add_argument("--n", type=int, help="sweep/localization: objects per world (default 60)")
    ex.add_argument("--seeds", type=int, default=10, help="seeds per configuration")
    ex.add_argument("--jobs", type=int, default=1, help="concurrent missions")
    ex.add_argument("--svg", action="store_true", help="also write SVG figures")
    ex.add_argument("--weight", type=float, default=0.5, help="r_diff weight of the best-cell score")
    ex.add_argument("--max", type=int, default=200, help="density: largest object count")
    ex.add_argument("--step", type=int, default=20, help="density: object count step")
    ex.add_argument("--images", type=int, default=500, help="certainty: images per altitude")
    ex.add_argument("--dist", nargs="+", choices=DISTRIBUTIONS, default=list(DISTRIBUTIONS))

    cal = sub.add_parser("calibrate", help="fit or check the detector profile")
    cal.add_argument("--profile", help="starting profile YAML (default: shipped calibration)")
    cal.add_argument("--trials", type=int, default=4000, help="images per altitude")
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--out", help="write the fitted profile here")
    cal.add_argument("--check", action="store_true", help="only report image-level F1 per altitude")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    out = {
        "field": getattr(args, "field", None),
        "profile": getattr(args, "profile", None),
        "seed": getattr(args, "seed", None),
        "output": getattr(args, "out", None),
        "level": getattr(args, "level", None),
        "world": getattr(args, "world", None),
        "world.distribution": getattr(args, "dist", None) if isinstance(getattr(args, "dist", None), str) else None,
        "world.n": getattr(args, "n", None),
    }
    for name in ("h_cov", "h_inspect", "c_accept", "c_reject", "certainty_measure"):
        out[f"planner.{name}"] = getattr(args, name, None)
    return out


# -- commands ----------------------------------------------------------------


def cmd_gen_world(args: argparse.Namespace) -> int:
    cfg = load_config(None, {"field": args.field, "world.n": args.n})
    if args.n < 0:
        raise ConfigError("--n must be non-negative")
    world = make_world(args.dist, cfg.load_field(), args.n, args.seed)
    meta = {"distribution": args.dist, "n": args.n, "seed": args.seed, "field": args.field}
    io.save_world(world, args.out, config=meta)
    log.info("wrote %d objects to %s", len(world), args.out)
    return EXIT_OK


def _load_world(cfg: RunConfig, field):
    if isinstance(cfg.world, str):
        return io.load_world(cfg.world)
    spec: WorldSpec = cfg.world
    return make_world(spec.distribution, field, spec.n, spec.seed)


def _mission_log_rows(result) -> list[dict]:
    rows = []
    for rec in result.images:
        t, r = rec.true_pose, rec.reported_pose
        rows.append(
            {
                "stage": rec.stage,
                "index": rec.index,
                "true_easting": t.easting,
                "true_northing": t.northing,
                "true_altitude": t.altitude,
                "true_heading": t.heading,
                "true_roll": t.gimbal_roll,
                "true_pitch": t.gimbal_pitch,
                "reported_easting": r.easting,
                "reported_northing": r.northing,
                "reported_altitude": r.altitude,
                "reported_heading": r.heading,
                "detections": len(rec.detections),
                "detection_list": ";".join(f"{x:.3f} {y:.3f} {c} {s:.4f}" for x, y, c, s in rec.detections),
                "map_size": rec.map_size,
            }
        )
    return rows


LOG_FIELDS = (
    "stage",
    "index",
    "true_easting",
    "true_northing",
    "true_altitude",
    "true_heading",
    "true_roll",
    "true_pitch",
    "reported_easting",
    "reported_northing",
    "reported_altitude",
    "reported_heading",
    "detections",
    "detection_list",
    "map_size",
)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _overrides(args))
    field = cfg.load_field()
    world = _load_world(cfg, field)
    profile = cfg.load_profile()
    result = run_mission(
        field, world, cfg.planner, cfg.camera, profile, cfg.level, cfg.seed, inspect=args.planner == "adaptive"
    )
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    meta = dict(cfg.to_dict(), planner_kind=args.planner)
    io.write_csv(out / "mission_log.csv", _mission_log_rows(result), LOG_FIELDS, meta)
    io.save_geojson(io.map_to_geojson(result.final_map, meta), out / "map.geojson")
    io.save_geojson(io.paths_to_geojson([result.coverage_path, result.inspection_path], meta), out / "paths.geojson")
    scenario = Scenario(field, cfg.camera, profile)
    match = result.evaluate(world)
    row = {
        "planner": args.planner,
        "h_cov": cfg.planner.h_cov,
        "c_accept": cfg.planner.c_accept,
        "c_reject": cfg.planner.c_reject,
        "level": cfg.level,
        "n_objects": len(world),
        "seed": cfg.seed,
        "tp": match.tp,
        "fp": match.fp,
        "fn": match.fn,
        "f1": f1(match),
        "coverage_length": result.coverage_length,
        "inspection_length": result.inspection_length,
        "total_length": result.total_length,
        "r_diff": relative_length(result.total_length, scenario.baseline_length),
        "warnings": "; ".join(result.warnings),
    }
    fields = list(row)
    io.write_csv(out / "metrics.csv", [row], fields, meta)
    print(f"F1 {row['f1']:.3f}  tp {match.tp} fp {match.fp} fn {match.fn}  length {result.total_length:.1f} m  "
          f"r_diff {row['r_diff']:.3f}")
    for w in result.warnings:
        log.warning(w)
    return EXIT_OK


def _write_failures(path: Path, failures) -> None:
    manifest = [{"task": {**asdict(f.task), "params": asdict(f.task.params)}, "error": repr(f.error)} for f in failures]
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")


def _progress(done: int, total: int) -> None:
    if done == total or done % 50 == 0:
        log.info("%d/%d missions", done, total)


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _overrides(args))
    if args.seeds < 1:
        raise ConfigError("--seeds must be >= 1")
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    profile = cfg.load_profile()
    field = cfg.load_field()
    scenario = Scenario(field, cfg.camera, profile, cfg.world.n if isinstance(cfg.world, WorldSpec) else 60, cfg.planner)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    seeds = range(cfg.seed, cfg.seed + args.seeds)
    meta = dict(cfg.to_dict(), experiment=args.name, seeds=args.seeds)

    if args.name == "certainty":
        rows = experiment_certainty_separability(profile, n_images=args.images, seed=cfg.seed, camera=cfg.camera)
        meta["images"] = args.images
        io.write_csv(out / "certainty.csv", rows, list(rows[0]), meta)
        for r in rows:
            print(f"{r['altitude']:>4g} m  {r['measure']:<10} t = {r['t']:.2f}")
        return EXIT_OK

    dists = list(dict.fromkeys(args.dist))
    if args.name == "sweep":
        grid = SweepGrid()
        tasks = sweep_tasks(scenario, grid, seeds, dists, cfg.level)
        keys = SWEEP_KEYS
        meta.update(weight=args.weight)
    elif args.name == "localization":
        tasks = localization_tasks(scenario, {d: cfg.best[d] for d in dists}, seeds)
        keys = ("distribution", "planner", "level", "h_cov")
    else:
        counts = list(range(0, args.max + 1, args.step)) if args.step > 0 else []
        if not counts:
            raise ConfigError("--step must be positive")
        tasks = density_tasks(scenario, {d: cfg.best[d] for d in dists}, seeds, counts)
        keys = ("distribution", "planner", "density")
        meta.update(max=args.max, step=args.step)

    log.info("%s: %d missions on %d worker(s)", args.name, len(tasks), args.jobs)
    rows, failures = run_tasks(scenario, tasks, args.jobs, _progress)
    io.write_csv(out / f"{args.name}.csv", rows, ROW_FIELDS, meta)
    summary = aggregate(rows, keys)
    io.write_csv(out / f"{args.name}_summary.csv", summary, [k for k in SUMMARY_FIELDS if k in summary[0]] if summary else SUMMARY_FIELDS, meta)

    if args.name == "sweep":
        best = {}
        for d in dists:
            try:
                cell = best_cell(summary, d, args.weight)
            except ValueError:
                continue
            best[d] = {k: cell[k] for k in ("h_cov", "c_accept", "c_reject")}
            print(f"{d}: best cell h_cov={cell['h_cov']:g} c_accept={cell['c_accept']:g} c_reject={cell['c_reject']:g} "
                  f"F1 {cell['f1_mean']:.3f} r_diff {cell['r_diff_mean']:.3f}")
        (out / "sweep_best.yaml").write_text(yaml.safe_dump({"best": best}, sort_keys=True), encoding="utf-8")
    elif args.name == "density":
        for (d, planner), curve in density_curves(rows).items():
            if planner == "adaptive":
                x = crossover_density(curve)
                print(f"{d}: adaptive reaches baseline length at {x:.0f} objects/ha" if math.isfinite(x)
                      else f"{d}: adaptive stays shorter than baseline up to {curve[-1][0]:.0f} objects/ha")

    if args.svg:
        _write_svgs(args.name, summary, out, dists)

    if failures:
        _write_failures(out / f"{args.name}_failures.json", failures)
        log.error("%d of %d missions failed; see %s_failures.json", len(failures), len(tasks), args.name)
        return EXIT_FAILURE
    return EXIT_OK


def _write_svgs(name: str, summary: list[dict], out: Path, dists: Sequence[str]) -> None:
    if name == "sweep":
        for d in dists:
            cells = [r for r in summary if r["distribution"] == d and r["planner"] == "adaptive"]
            cols = sorted({(r["c_accept"], r["c_reject"]) for r in cells}, key=lambda t: (-t[0], t[1]))
            rows = sorted({r["h_cov"] for r in cells})
            lookup = {(r["h_cov"], r["c_accept"], r["c_reject"]): r for r in cells}
            for metric, title in (("f1_mean", "F1"), ("r_diff_mean", "relative length")):
                values = [[lookup.get((h, a, c), {}).get(metric, math.nan) for a, c in cols] for h in rows]
                text = svg.heatmap(values, [f"{h:g} m" for h in rows], [f"{a:g}/{c:g}" for a, c in cols],
                                   f"{d}: adaptive {title} (c_accept/c_reject)")
                (out / f"sweep_{d}_{metric.split('_')[0]}.svg").write_text(text, encoding="utf-8")
    elif name == "localization":
        for d in dists:
            series = {}
            for r in summary:
                if r["distribution"] == d:
                    series.setdefault(f"{r['planner']} {r['h_cov']:g} m", []).append(
                        (LEVEL_NAMES.index(r["level"]), r["f1_mean"], r["f1_sd"])
                    )
            text = svg.line_chart(series, "localization level (0 = perfect ... 4 = very poor)", "F1", d)
            (out / f"localization_{d}.svg").write_text(text, encoding="utf-8")
    elif name == "density":
        for d in dists:
            series = {
                r_planner: [(r["density"], r["r_diff_mean"], r["r_diff_sd"]) for r in summary
                            if r["distribution"] == d and r["planner"] == r_planner]
                for r_planner in ("adaptive", "coverage")
            }
            text = svg.line_chart(series, "objects per hectare", "relative path length", d, reference=1.0)
            (out / f"density_{d}.svg").write_text(text, encoding="utf-8")


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = load_config(None, {"profile": args.profile})
    profile = cfg.load_profile()
    if not args.check:
        profile = fit_profile(profile, TARGET_F1, n_trials=args.trials, seed=args.seed)
        if args.out:
            profile.save(args.out)
            log.info("wrote %s", args.out)
    for anchor in profile.anchors:
        tp, fp, fn = image_trials(profile, anchor.altitude, args.trials, args.seed + 1)
        score = 2 * tp / (2 * tp + fp + fn) if tp + fp + fn else math.nan
        target = TARGET_F1.get(anchor.altitude)
        note = f" (target {target:.2f})" if target is not None else ""
        print(f"{anchor.altitude:>4g} m  image F1 {score:.3f}{note}")
    return EXIT_OK


COMMANDS = {
    "gen-world": cmd_gen_world,
    "run": cmd_run,
    "experiment": cmd_experiment,
    "calibrate": cmd_calibrate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PlacementError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
