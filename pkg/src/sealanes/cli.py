"""Batch pipeline driver: cluster -> patterns -> calibrate -> score, plus simulate.

Each subcommand reads the previous stage's JSON and writes plot-ready
artifacts.  Every output embeds the tool version, the run configuration,
and SHA-256 digests of its inputs, and all randomized stages take an
explicit --seed, so reruns with identical inputs are byte-identical.
Failures print a machine-readable JSON object to stderr and exit
nonzero.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .clustering import ClusterParams, Clustering, dbscan, dbscansd
from .errors import ConfigError, SealanesError
from .ingest import Dataset, group_trajectories, parse_ais_csv, split_by_motion
from .patterns import PatternModel, build_pattern_model
from .scoring import (
    CalibrationModel,
    calibrate,
    score_trajectory,
    threshold_score_moments,
)
from .simulation import (
    PRESETS,
    SimConfig,
    parse_distribution,
    preset_config,
    simulate_rank_zscore,
    simulate_threshold_score,
)
from .track import MotionClass, TrackPoint


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _header(command: str, config: dict, inputs: dict[str, str | Path]) -> dict:
    return {
        "tool": "sealanes",
        "tool_version": __version__,
        "command": command,
        "run_config": config,
        "input_digests": {name: _sha256(p) for name, p in sorted(inputs.items())},
    }


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _csv_preamble(fh, header: dict) -> None:
    fh.write(f"# tool: sealanes {__version__}\n")
    fh.write(f"# command: {header['command']}\n")
    fh.write(f"# config: {json.dumps(header['run_config'], sort_keys=True)}\n")
    for name, digest in header["input_digests"].items():
        fh.write(f"# input {name}: sha256={digest}\n")


def _point_dict(p: TrackPoint) -> dict:
    return {
        "lat": p.lat,
        "lon": p.lon,
        "speed": p.speed,
        "course": p.course,
        "ts": p.timestamp.isoformat() if p.timestamp else None,
        "id": p.vessel_id,
    }


def _point_from_dict(d: dict) -> TrackPoint:
    from datetime import datetime

    return TrackPoint(
        lat=d["lat"],
        lon=d["lon"],
        speed=d["speed"],
        course=d["course"],
        timestamp=datetime.fromisoformat(d["ts"]) if d.get("ts") else None,
        vessel_id=d.get("id"),
    )


def _schema_from_args(args) -> dict[str, str]:
    schema = {}
    for field, flag in (
        ("mmsi", "col_mmsi"),
        ("timestamp", "col_timestamp"),
        ("lat", "col_lat"),
        ("lon", "col_lon"),
        ("speed", "col_sog"),
        ("course", "col_cog"),
    ):
        value = getattr(args, flag, None)
        if value:
            schema[field] = value
    return schema


def _load_dataset(args) -> Dataset:
    dataset = parse_ais_csv(args.input, schema=_schema_from_args(args))
    if not dataset.points:
        raise ConfigError(f"empty dataset: {args.input} yielded no usable points")
    return dataset


def _geojson_features(points, clustering: Clustering | None, motion: MotionClass) -> list[dict]:
    features = []
    if clustering is None:
        return features
    for cluster in clustering.clusters:
        coords = [[points[i].lon, points[i].lat] for i in cluster.member_indices]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "MultiPoint", "coordinates": coords},
                "properties": {
                    "cluster_id": cluster.cluster_id,
                    "motion": motion.value,
                    "member_count": len(cluster.member_indices),
                    "core_count": sum(cluster.core_flags),
                    "noise": False,
                },
            }
        )
    if clustering.noise:
        coords = [[points[i].lon, points[i].lat] for i in clustering.noise]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "MultiPoint", "coordinates": coords},
                "properties": {
                    "cluster_id": None,
                    "motion": motion.value,
                    "member_count": len(clustering.noise),
                    "core_count": 0,
                    "noise": True,
                },
            }
        )
    return features


def cmd_cluster(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    dataset = _load_dataset(args)

    stationary: list[TrackPoint] = []
    moving: list[TrackPoint] = []
    for traj in group_trajectories(dataset):
        st, mv = split_by_motion(traj)
        stationary.extend(st)
        moving.extend(mv)

    params = ClusterParams(
        eps_dist=args.eps_dist,
        eps_crs=args.eps_crs,
        eps_spd=args.eps_spd,
        n_min=args.n_min,
        course_mode=args.course_mode,
    )
    moving_clustering = dbscansd(moving, params, motion=MotionClass.MOVING) if moving else None
    stationary_clustering = (
        dbscan(stationary, args.eps_dist, args.n_min, motion=MotionClass.STATIONARY)
        if stationary
        else None
    )

    config = {
        "input": str(args.input),
        "eps_dist": args.eps_dist,
        "eps_crs": args.eps_crs,
        "eps_spd": args.eps_spd,
        "n_min": args.n_min,
        "course_mode": args.course_mode,
    }
    header = _header("cluster", config, {"input": args.input})
    payload = {
        "header": header,
        "provenance": {
            "total_rows": dataset.provenance.total_rows,
            "accepted": dataset.provenance.accepted,
            "rejected": dataset.provenance.rejected,
        },
        "stationary": {
            "points": [_point_dict(p) for p in stationary],
            "clustering": stationary_clustering.to_json_dict() if stationary_clustering else None,
        },
        "moving": {
            "points": [_point_dict(p) for p in moving],
            "clustering": moving_clustering.to_json_dict() if moving_clustering else None,
        },
    }
    _write_json(outdir / "clusters.json", payload)

    features = _geojson_features(moving, moving_clustering, MotionClass.MOVING)
    features += _geojson_features(stationary, stationary_clustering, MotionClass.STATIONARY)
    _write_json(
        outdir / "clusters.geojson",
        {"type": "FeatureCollection", "features": features, "header": header},
    )

    if dataset.provenance.rejected:
        with open(outdir / "rejected_rows.csv", "w", newline="", encoding="utf-8") as fh:
            _csv_preamble(fh, header)
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row", "reason"])
            for rej in dataset.provenance.rejects:
                writer.writerow([rej.row, rej.reason])
    return 0


def cmd_patterns(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    raw = json.loads(Path(args.clusters).read_text())

    moving_points = [_point_from_dict(d) for d in raw["moving"]["points"]]
    stationary_points = [_point_from_dict(d) for d in raw["stationary"]["points"]]
    moving_clustering = (
        Clustering.from_json_dict(raw["moving"]["clustering"])
        if raw["moving"]["clustering"]
        else None
    )
    stationary_clustering = (
        Clustering.from_json_dict(raw["stationary"]["clustering"])
        if raw["stationary"]["clustering"]
        else None
    )
    if moving_clustering is None and stationary_clustering is None:
        raise ConfigError("clusters file holds no clustering to summarize")

    any_clustering = moving_clustering or stationary_clustering
    course_mode = args.course_mode or any_clustering.params.course_mode
    delta = args.delta if args.delta is not None else any_clustering.params.eps_dist

    model = build_pattern_model(
        moving_points,
        moving_clustering,
        stationary_points,
        stationary_clustering,
        delta=delta,
        seed=args.seed,
        course_mode=course_mode,
    )
    config = {
        "clusters": str(args.clusters),
        "delta": delta,
        "seed": args.seed,
        "course_mode": course_mode,
    }
    payload = model.to_json_dict()
    payload["header"] = _header("patterns", config, {"clusters": args.clusters})
    _write_json(outdir / "patterns.json", payload)
    return 0


def cmd_calibrate(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    model = PatternModel.load(args.model)
    dataset = _load_dataset(args)
    trajectories = group_trajectories(dataset)
    cal = calibrate(trajectories, model, alpha=args.alpha)
    config = {
        "model": str(args.model),
        "input": str(args.input),
        "alpha": args.alpha,
    }
    payload = cal.to_json_dict()
    payload["header"] = _header(
        "calibrate", config, {"model": args.model, "input": args.input}
    )
    _write_json(outdir / "calibration.json", payload)
    return 0


def cmd_score(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    raw_model = json.loads(Path(args.model).read_text())
    raw_cal = json.loads(Path(args.calibration).read_text())
    if raw_model.get("version") != raw_cal.get("version"):
        raise ConfigError(
            "model file version mismatch: "
            f"patterns={raw_model.get('version')} calibration={raw_cal.get('version')}"
        )
    model = PatternModel.from_json_dict(raw_model)
    cal = CalibrationModel.from_json_dict(raw_cal)

    dataset = _load_dataset(args)
    trajectories = group_trajectories(dataset)

    def score_one(traj):
        try:
            return score_trajectory(traj, model, cal), None
        except SealanesError as exc:
            return None, str(exc)

    mode = model.build_params.get("course_mode", "circular")

    threads = max(1, args.threads)
    if threads > 1 and len(trajectories) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(score_one, trajectories))
    else:
        results = [score_one(t) for t in trajectories]

    scores = []
    failures = []
    for traj, (score, err) in zip(trajectories, results):
        if score is not None:
            scores.append(score)
        else:
            failures.append({"trajectory_id": traj.id, "error": err})
    scores.sort(key=lambda s: (s.rank_zscore, s.trajectory_id))

    config = {
        "model": str(args.model),
        "calibration": str(args.calibration),
        "input": str(args.input),
        "threads": threads,
        "diagnostics": bool(args.diagnostics),
    }
    header = _header(
        "score",
        config,
        {"model": args.model, "calibration": args.calibration, "input": args.input},
    )
    _write_json(
        outdir / "scores.json",
        {
            "header": header,
            "scores": [s.to_json_dict() for s in scores],
            "errors": failures,
        },
    )

    with open(outdir / "scores_summary.csv", "w", newline="", encoding="utf-8") as fh:
        _csv_preamble(fh, header)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "id",
                "m_st",
                "m_mv",
                "threshold_score",
                "rank_zscore",
                "threshold_score_mean",
                "threshold_score_sd",
                "error",
            ]
        )
        for s in scores:
            mean, var = threshold_score_moments(s.m_st, s.m_mv, cal.alpha)
            writer.writerow(
                [
                    s.trajectory_id,
                    s.m_st,
                    s.m_mv,
                    repr(s.threshold_score),
                    repr(s.rank_zscore),
                    repr(mean),
                    repr(var**0.5),
                    "",
                ]
            )
        for failure in sorted(failures, key=lambda f: f["trajectory_id"]):
            writer.writerow([failure["trajectory_id"], "", "", "", "", "", "", failure["error"]])

    if args.diagnostics:
        from .deviations import cdd_metric_best_match, trajectory_deviations

        with open(outdir / "deviations.csv", "w", newline="", encoding="utf-8") as fh:
            _csv_preamble(fh, header)
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["id", "point", "motion", "add", "rdd", "cdd", "cdd_best_match",
                 "nearest_cluster", "nearest_band"]
            )
            for traj in trajectories:
                try:
                    devs = trajectory_deviations(traj, model, mode)
                except SealanesError:
                    continue
                for k, (p, d) in enumerate(zip(traj.points, devs)):
                    best = (
                        repr(cdd_metric_best_match(p, model, mode))
                        if d.motion is MotionClass.MOVING
                        else ""
                    )
                    writer.writerow(
                        [
                            traj.id,
                            k,
                            d.motion.value,
                            "" if d.add is None else repr(d.add),
                            "" if d.rdd is None else repr(d.rdd),
                            "" if d.cdd is None else repr(d.cdd),
                            best,
                            "" if d.nearest is None else d.nearest.cluster_id,
                            "" if d.nearest is None else d.nearest.band_index,
                        ]
                    )
    return 0


def _sim_config_from_args(args) -> SimConfig:
    if args.preset:
        return preset_config(args.preset, seed=args.seed, replications=args.replications)
    if args.replications is None:
        raise ConfigError("--replications is required without --preset")
    return SimConfig(
        r_st=args.r_st,
        r_mv=args.r_mv,
        m_st=args.m_st,
        m_mv=args.m_mv,
        replications=args.replications,
        seed=args.seed,
        dist_v=parse_distribution(args.dist_v) if args.dist_v else None,
        dist_y=parse_distribution(args.dist_y) if args.dist_y else None,
        dist_z=parse_distribution(args.dist_z) if args.dist_z else None,
    )


def cmd_simulate(args) -> int:
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = _sim_config_from_args(args)
    threads = max(1, args.threads)
    if args.statistic == "t2":
        result = simulate_rank_zscore(cfg, threads=threads)
    else:
        result = simulate_threshold_score(cfg, alpha=args.alpha, threads=threads)

    config = dict(result.config)
    config["statistic"] = args.statistic
    config["preset"] = args.preset
    header = _header("simulate", config, {})

    samples_name = f"{args.statistic}_samples.csv"
    with open(outdir / samples_name, "w", newline="", encoding="utf-8") as fh:
        _csv_preamble(fh, header)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample"])
        for s in result.samples:
            writer.writerow([repr(s)])

    if result.qq_pairs is not None:
        with open(outdir / "qq_pairs.csv", "w", newline="", encoding="utf-8") as fh:
            _csv_preamble(fh, header)
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["theoretical", "empirical"])
            for t, e in result.qq_pairs:
                writer.writerow([repr(t), repr(e)])

    _write_json(
        outdir / "summary.json",
        {
            "header": header,
            "statistic": result.statistic,
            "summary": result.summary,
            "ks_stat": result.ks_stat,
        },
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sealanes",
        description="Learn normal maritime traffic patterns from AIS data and "
        "score trajectories for anomalous behavior.",
    )
    parser.add_argument("--version", action="version", version=f"sealanes {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_csv_flags(p):
        p.add_argument("--input", required=True, help="AIS CSV file")
        p.add_argument("--col-mmsi", default=None, help="column holding the vessel id")
        p.add_argument("--col-timestamp", default=None)
        p.add_argument("--col-lat", default=None)
        p.add_argument("--col-lon", default=None)
        p.add_argument("--col-sog", default=None)
        p.add_argument("--col-cog", default=None)

    p = sub.add_parser("cluster", help="cluster training data by motion class")
    add_csv_flags(p)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--eps-dist", type=float, default=0.02, help="degrees (default .02)")
    p.add_argument("--eps-crs", type=float, default=90.0, help="degrees (default 90)")
    p.add_argument("--eps-spd", type=float, default=2.5, help="knots (default 2.5)")
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--course-mode", choices=["plain", "circular"], default="circular")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("patterns", help="summarize clusters into a pattern model")
    p.add_argument("--clusters", required=True, help="clusters.json from the cluster stage")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--delta", type=float, default=None, help="band width (default eps_dist)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--course-mode", choices=["plain", "circular"], default=None)
    p.set_defaults(func=cmd_patterns)

    p = sub.add_parser("calibrate", help="derive deviation samples and thresholds")
    p.add_argument("--model", required=True, help="patterns.json")
    add_csv_flags(p)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("score", help="score new trajectories against the model")
    p.add_argument("--model", required=True, help="patterns.json")
    p.add_argument("--calibration", required=True, help="calibration.json")
    add_csv_flags(p)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument(
        "--diagnostics",
        action="store_true",
        help="also write per-point deviations (including the location-blind "
        "best-match CDD variant) to deviations.csv",
    )
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("simulate", help="Monte Carlo checks of the score distributions")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--statistic", choices=["t1", "t2"], default="t2")
    p.add_argument("--alpha", type=float, default=0.05, help="threshold level for t1")
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--r-st", type=int, default=0)
    p.add_argument("--r-mv", type=int, default=0)
    p.add_argument("--m-st", type=int, default=0)
    p.add_argument("--m-mv", type=int, default=0)
    p.add_argument("--dist-v", default=None, help='e.g. "exponential(2)"')
    p.add_argument("--dist-y", default=None, help='e.g. "gamma(2,4)"')
    p.add_argument("--dist-z", default=None, help='e.g. "chi_squared(8)"')
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SealanesError as exc:
        error = {"error": type(exc).__name__, "detail": str(exc)}
        print(json.dumps(error), file=sys.stderr)
        return 1
    except OSError as exc:
        error = {"error": "IOError", "detail": str(exc)}
        print(json.dumps(error), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
