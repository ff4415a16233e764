"""Deviation metrics between a track point and a pattern model.

Stationary points get an absolute distance deviation (ADD): the
distance to the nearest stationary sampling point.  Moving points get a
relative distance deviation (RDD): the distance to the nearest gravity
vector scaled by that vector's median spread, plus a course/speed
deviation (CDD): cos of the course difference times the min/max speed
ratio against that nearest vector.  Small or negative CDD flags
anomalous heading or speed; large ADD/RDD flags anomalous position.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

from .errors import ModelError
from .patterns import GravityVector, PatternModel
from .track import MotionClass, TrackPoint, Trajectory, classify_motion, course_diff

#: Guards RDD's division when a band's median spread is zero.
MEDIAN_DISTANCE_FLOOR = 1e-6


@dataclass(frozen=True)
class PointDeviation:
    motion: MotionClass
    add: float | None = None
    rdd: float | None = None
    cdd: float | None = None
    nearest: GravityVector | None = None


def add_metric(p: TrackPoint, model: PatternModel) -> float:
    """Distance from p to the nearest stationary sampling point."""
    if not model.sampling_points:
        raise ModelError("pattern model has no stationary sampling points")
    return min(
        math.sqrt((p.lat - s.lat) ** 2 + (p.lon - s.lon) ** 2) for s in model.sampling_points
    )


def rdd_metric(p: TrackPoint, model: PatternModel) -> tuple[float, GravityVector]:
    """Spread-scaled distance to the nearest gravity vector, and that vector.

    Ties break toward the lowest (cluster_id, band_index).
    """
    if not model.gravity_vectors:
        raise ModelError("pattern model has no gravity vectors")
    best: tuple[float, int, int] | None = None
    best_vec: GravityVector | None = None
    for g in model.gravity_vectors:
        dist = math.sqrt((p.lat - g.lat) ** 2 + (p.lon - g.lon) ** 2)
        ratio = dist / max(g.med_dist, MEDIAN_DISTANCE_FLOOR)
        key = (ratio, g.cluster_id, g.band_index)
        if best is None or key < best:
            best = key
            best_vec = g
    assert best is not None and best_vec is not None
    return best[0], best_vec


def _cos_speed_term(course_a: float, speed_a: float, p: TrackPoint, mode: str) -> float:
    alpha = course_diff(course_a, p.course, mode)
    hi = max(speed_a, p.speed)
    ratio = 1.0 if hi == 0.0 else min(speed_a, p.speed) / hi
    return math.cos(math.radians(alpha)) * ratio


def cdd_metric(p: TrackPoint, nearest: GravityVector, mode: str = "circular") -> float:
    """Course/speed agreement with the nearest gravity vector, in [-1, 1]."""
    return _cos_speed_term(nearest.course, nearest.speed, p, mode)


def cdd_metric_best_match(p: TrackPoint, model: PatternModel, mode: str = "circular") -> float:
    """Best course/speed agreement over all gravity vectors, location ignored.

    Kept for comparison studies only: it can report a perfect match
    from a distant lane while nearby traffic runs the other way.
    """
    if not model.gravity_vectors:
        raise ModelError("pattern model has no gravity vectors")
    return max(_cos_speed_term(g.course, g.speed, p, mode) for g in model.gravity_vectors)


def point_deviation(p: TrackPoint, model: PatternModel, mode: str = "circular") -> PointDeviation:
    """ADD for stationary points; RDD and CDD for moving points."""
    motion = classify_motion(p)
    if motion is MotionClass.STATIONARY:
        return PointDeviation(motion=motion, add=add_metric(p, model))
    rdd, nearest = rdd_metric(p, model)
    return PointDeviation(
        motion=motion,
        rdd=rdd,
        cdd=cdd_metric(p, nearest, mode),
        nearest=nearest,
    )


def trajectory_deviations(
    trajectory: Trajectory, model: PatternModel, mode: str = "circular"
) -> list[PointDeviation]:
    return [point_deviation(p, model, mode) for p in trajectory.points]


def deviations_to_csv(
    deviations: Sequence[PointDeviation], target: str | Path | TextIO
) -> None:
    """Write one row per point: index, motion, add, rdd, cdd, nearest ids."""
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="", encoding="utf-8") as fh:
            deviations_to_csv(deviations, fh)
        return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(["point", "motion", "add", "rdd", "cdd", "nearest_cluster", "nearest_band"])
    for i, d in enumerate(deviations):
        writer.writerow(
            [
                i,
                d.motion.value,
                "" if d.add is None else repr(d.add),
                "" if d.rdd is None else repr(d.rdd),
                "" if d.cdd is None else repr(d.cdd),
                "" if d.nearest is None else d.nearest.cluster_id,
                "" if d.nearest is None else d.nearest.band_index,
            ]
        )
