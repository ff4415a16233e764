"""Distill clusters into the summaries used for scoring.

Moving clusters become gravity vectors: the cluster is projected onto
its mean course, cut into bands of width delta along that axis, and
each nonempty band is summarized by the mean position/speed/course of
its members plus the median distance from members to the band's mean
position.  Stationary clusters become sampling points: a few actual
members, randomly chosen so that no two are closer than eps_dist.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .clustering import ClusterParams, Clustering
from .errors import ConfigError, DegenerateCourseError, SchemaError
from .track import MotionClass, TrackPoint, check_course_mode, euclid_dist

log = logging.getLogger(__name__)

#: On-disk pattern model format.
PATTERN_FORMAT_VERSION = 1

#: Give up sampling after this many attempts per requested point.
SAMPLING_ATTEMPT_FACTOR = 100


@dataclass(frozen=True)
class MeanCourse:
    value: float
    mode: str


@dataclass(frozen=True)
class GravityVector:
    lat: float
    lon: float
    speed: float
    course: float
    med_dist: float
    band_index: int
    cluster_id: int
    member_count: int


@dataclass(frozen=True)
class StationarySamplingPoint:
    lat: float
    lon: float
    speed: float
    course: float
    cluster_id: int


@dataclass(frozen=True)
class PatternModel:
    gravity_vectors: tuple[GravityVector, ...]
    sampling_points: tuple[StationarySamplingPoint, ...]
    build_params: dict

    def to_json_dict(self) -> dict:
        return {
            "version": PATTERN_FORMAT_VERSION,
            "build_params": self.build_params,
            "gravity_vectors": [vars(g) for g in self.gravity_vectors],
            "sampling_points": [vars(s) for s in self.sampling_points],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PatternModel":
        if d.get("version") != PATTERN_FORMAT_VERSION:
            raise SchemaError(
                f"pattern model format version {d.get('version')} != {PATTERN_FORMAT_VERSION}"
            )
        return cls(
            gravity_vectors=tuple(GravityVector(**g) for g in d["gravity_vectors"]),
            sampling_points=tuple(StationarySamplingPoint(**s) for s in d["sampling_points"]),
            build_params=d["build_params"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "PatternModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def mean_course(courses: Sequence[float], mode: str = "circular") -> MeanCourse:
    """Average course of a cluster, in degrees in [0, 360).

    Arithmetic mode is the plain mean of the raw values; circular mode
    averages unit heading vectors and fails when they cancel out.
    """
    check_course_mode(mode)
    if len(courses) == 0:
        raise ConfigError("mean_course of an empty collection")
    if mode == "plain":
        return MeanCourse(value=sum(courses) / len(courses), mode=mode)
    s = sum(math.sin(math.radians(c)) for c in courses) / len(courses)
    c = sum(math.cos(math.radians(c)) for c in courses) / len(courses)
    if math.hypot(s, c) < 1e-12:
        raise DegenerateCourseError("courses cancel out; circular mean undefined")
    value = math.degrees(math.atan2(s, c)) % 360.0
    return MeanCourse(value=value, mode=mode)


def project_along_course(p: TrackPoint, mean: MeanCourse) -> float:
    """Scalar projection of (lat, lon) onto the mean-course unit vector.

    Courses are clockwise from north, so the unit vector has north
    component cos and east component sin: due north projects to lat,
    due east to lon.
    """
    theta = math.radians(mean.value)
    return p.lat * math.cos(theta) + p.lon * math.sin(theta)


def _median_low(values: list[float]) -> float:
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def gravity_vectors(
    members: Sequence[TrackPoint],
    delta: float,
    mode: str = "circular",
    cluster_id: int = 0,
) -> list[GravityVector]:
    """Band a moving cluster along its mean course and summarize each band.

    The band count is ceil(L / delta) for span L of the projections
    (one band when L is zero); members land in band
    floor((proj - min) / delta), with the maximal projection folded into
    the last band.  Empty bands are omitted.
    """
    if len(members) == 0:
        raise ConfigError("gravity_vectors of an empty cluster")
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    cbar = mean_course([p.course for p in members], mode)
    proj = [project_along_course(p, cbar) for p in members]
    lo = min(proj)
    span = max(proj) - lo
    n_bands = 1 if span == 0 else math.ceil(span / delta)

    bands: dict[int, list[TrackPoint]] = {}
    for p, x in zip(members, proj):
        b = min(int((x - lo) // delta), n_bands - 1)
        bands.setdefault(b, []).append(p)

    out = []
    for b in sorted(bands):
        grp = bands[b]
        k = len(grp)
        glat = sum(p.lat for p in grp) / k
        glon = sum(p.lon for p in grp) / k
        gspd = sum(p.speed for p in grp) / k
        gcrs = mean_course([p.course for p in grp], mode).value
        center = TrackPoint(lat=glat, lon=glon, speed=0.0, course=0.0)
        med = _median_low([euclid_dist(p, center) for p in grp])
        out.append(
            GravityVector(
                lat=glat,
                lon=glon,
                speed=gspd,
                course=gcrs,
                med_dist=med,
                band_index=b,
                cluster_id=cluster_id,
                member_count=k,
            )
        )
    return out


def sampling_target(members: Sequence[TrackPoint], eps_dist: float) -> int:
    """Number of sampling points for a stationary cluster.

    One point when the bounding box has zero area, otherwise
    ceil(area / (pi * eps_dist^2)).
    """
    lats = [p.lat for p in members]
    lons = [p.lon for p in members]
    area = abs((max(lats) - min(lats)) * (max(lons) - min(lons)))
    if area == 0:
        return 1
    return math.ceil(area / (math.pi * eps_dist * eps_dist))


def stationary_sampling_points(
    members: Sequence[TrackPoint],
    eps_dist: float,
    rng: np.random.Generator,
    cluster_id: int = 0,
) -> list[StationarySamplingPoint]:
    """Randomly sample well-separated representatives of a stationary cluster.

    Candidates are drawn uniformly without replacement and kept when at
    least eps_dist from everything already kept.  If the target can't
    be reached within the attempt cap, the short sample is returned.
    """
    if len(members) == 0:
        raise ConfigError("stationary_sampling_points of an empty cluster")
    target = sampling_target(members, eps_dist)
    max_attempts = SAMPLING_ATTEMPT_FACTOR * target

    chosen: list[TrackPoint] = []
    attempts = 0
    for k in rng.permutation(len(members)):
        if len(chosen) >= target or attempts >= max_attempts:
            break
        attempts += 1
        candidate = members[int(k)]
        if all(euclid_dist(candidate, q) >= eps_dist for q in chosen):
            chosen.append(candidate)
    if len(chosen) < target:
        log.warning(
            "stationary cluster %d: sampled %d of %d points (separation %g unreachable)",
            cluster_id,
            len(chosen),
            target,
            eps_dist,
        )
    return [
        StationarySamplingPoint(
            lat=p.lat, lon=p.lon, speed=p.speed, course=p.course, cluster_id=cluster_id
        )
        for p in chosen
    ]


def cluster_rng(seed: int, motion: MotionClass, cluster_id: int) -> np.random.Generator:
    """Independent, reproducible stream for one cluster of the build."""
    motion_key = 0 if motion is MotionClass.STATIONARY else 1
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(motion_key, cluster_id))
    return np.random.default_rng(ss)


def build_pattern_model(
    moving_points: Sequence[TrackPoint],
    moving_clustering: Clustering | None,
    stationary_points: Sequence[TrackPoint],
    stationary_clustering: Clustering | None,
    delta: float,
    seed: int,
    course_mode: str = "circular",
) -> PatternModel:
    """Assemble the full pattern model from both clusterings."""
    check_course_mode(course_mode)
    gvs: list[GravityVector] = []
    if moving_clustering is not None:
        for cluster in moving_clustering.clusters:
            members = [moving_points[i] for i in cluster.member_indices]
            gvs.extend(
                gravity_vectors(members, delta, mode=course_mode, cluster_id=cluster.cluster_id)
            )
    ssps: list[StationarySamplingPoint] = []
    eps_dist = None
    if stationary_clustering is not None:
        eps_dist = stationary_clustering.params.eps_dist
        for cluster in stationary_clustering.clusters:
            members = [stationary_points[i] for i in cluster.member_indices]
            rng = cluster_rng(seed, MotionClass.STATIONARY, cluster.cluster_id)
            ssps.extend(
                stationary_sampling_points(members, eps_dist, rng, cluster_id=cluster.cluster_id)
            )

    params: ClusterParams | None = None
    if moving_clustering is not None:
        params = moving_clustering.params
    elif stationary_clustering is not None:
        params = stationary_clustering.params
    build_params = {
        "clustering": params.to_json_dict() if params else None,
        "delta": delta,
        "seed": seed,
        "course_mode": course_mode,
    }
    return PatternModel(
        gravity_vectors=tuple(gvs),
        sampling_points=tuple(ssps),
        build_params=build_params,
    )
