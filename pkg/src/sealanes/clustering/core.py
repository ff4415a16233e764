"""Density-based clustering of track points.

The neighborhood predicate bounds Euclidean position distance and,
optionally, absolute speed and course differences; clusters are the
maximal sets closed under density-connectivity with respect to that
three-way predicate.  Unlimited course/speed thresholds reduce the
algorithm to plain position-only DBSCAN.

The production driver computes all neighborhoods with a grid-bucketed
kernel, links core points with a union-find sweep, and attaches border
points to the first claiming core in ascending point-index order, which
makes the result deterministic and independent of input order (as a
partition of core points).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from ..track import MotionClass, check_course_mode, course_diff
from .neighbors import neighbor_lists


@dataclass(frozen=True)
class ClusterParams:
    """Thresholds for the neighborhood predicate.

    eps_crs and eps_spd default to unlimited (math.inf), which yields
    position-only clustering.
    """

    eps_dist: float
    eps_crs: float = math.inf
    eps_spd: float = math.inf
    n_min: int = 5
    course_mode: str = "circular"

    def __post_init__(self) -> None:
        if not self.eps_dist > 0:
            raise ConfigError(f"eps_dist must be > 0, got {self.eps_dist}")
        if not self.eps_crs > 0:
            raise ConfigError(f"eps_crs must be > 0, got {self.eps_crs}")
        if not self.eps_spd > 0:
            raise ConfigError(f"eps_spd must be > 0, got {self.eps_spd}")
        if self.n_min < 1:
            raise ConfigError(f"n_min must be >= 1, got {self.n_min}")
        check_course_mode(self.course_mode)

    def to_json_dict(self) -> dict:
        return {
            "eps_dist": self.eps_dist,
            "eps_crs": None if math.isinf(self.eps_crs) else self.eps_crs,
            "eps_spd": None if math.isinf(self.eps_spd) else self.eps_spd,
            "n_min": self.n_min,
            "course_mode": self.course_mode,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ClusterParams":
        return cls(
            eps_dist=d["eps_dist"],
            eps_crs=math.inf if d.get("eps_crs") is None else d["eps_crs"],
            eps_spd=math.inf if d.get("eps_spd") is None else d["eps_spd"],
            n_min=d["n_min"],
            course_mode=d.get("course_mode", "circular"),
        )


@dataclass(frozen=True)
class Cluster:
    cluster_id: int
    member_indices: tuple[int, ...]
    core_flags: tuple[bool, ...]
    motion: MotionClass

    def core_indices(self) -> tuple[int, ...]:
        return tuple(i for i, c in zip(self.member_indices, self.core_flags) if c)


@dataclass(frozen=True)
class Clustering:
    clusters: tuple[Cluster, ...]
    noise: tuple[int, ...]
    params: ClusterParams
    n_points: int

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json_dict(),
            "clusters": [
                {
                    "id": c.cluster_id,
                    "motion": c.motion.value,
                    "member_indices": list(c.member_indices),
                    "core_flags": list(c.core_flags),
                }
                for c in self.clusters
            ],
            "noise": list(self.noise),
            "n_points": self.n_points,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Clustering":
        clusters = tuple(
            Cluster(
                cluster_id=c["id"],
                member_indices=tuple(c["member_indices"]),
                core_flags=tuple(bool(f) for f in c["core_flags"]),
                motion=MotionClass(c["motion"]),
            )
            for c in d["clusters"]
        )
        return cls(
            clusters=clusters,
            noise=tuple(d["noise"]),
            params=ClusterParams.from_json_dict(d["params"]),
            n_points=d["n_points"],
        )


def point_arrays(points) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    n = len(points)
    lat = np.fromiter((p.lat for p in points), dtype=np.float64, count=n)
    lon = np.fromiter((p.lon for p in points), dtype=np.float64, count=n)
    speed = np.fromiter((p.speed for p in points), dtype=np.float64, count=n)
    course = np.fromiter((p.course for p in points), dtype=np.float64, count=n)
    return lat, lon, speed, course


def query_neighbors(points, i: int, params: ClusterParams) -> set[int]:
    """Indices within all three thresholds of point i, including i itself.

    Point i is a core point when the result has at least n_min members.
    """
    a = points[i]
    eps2 = params.eps_dist * params.eps_dist
    out = set()
    for j, b in enumerate(points):
        dlat = b.lat - a.lat
        dlon = b.lon - a.lon
        if not (dlat * dlat + dlon * dlon) < eps2:
            continue
        if math.isfinite(params.eps_spd) and not abs(b.speed - a.speed) < params.eps_spd:
            continue
        if math.isfinite(params.eps_crs):
            if not course_diff(a.course, b.course, params.course_mode) < params.eps_crs:
                continue
        out.add(j)
    return out


def _find(parent: np.ndarray, x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return int(x)


def dbscansd(
    points,
    params: ClusterParams,
    motion: MotionClass = MotionClass.MOVING,
    method: str = "grid",
    backend: str | None = None,
) -> Clustering:
    """Cluster points under the distance/course/speed predicate.

    Every input index ends up in exactly one cluster or in noise; border
    points reachable from several clusters go to the cluster of the
    lowest-indexed core point that reaches them.
    """
    n = len(points)
    if n == 0:
        raise ConfigError("empty dataset: no points to cluster")
    lat, lon, speed, course = point_arrays(points)
    indptr, indices = neighbor_lists(
        lat,
        lon,
        speed,
        course,
        eps_dist=params.eps_dist,
        eps_crs=params.eps_crs,
        eps_spd=params.eps_spd,
        circular=params.course_mode == "circular",
        method=method,
        backend=backend,
    )
    counts = np.diff(indptr)
    core = counts >= params.n_min

    # Union cores along directly-reachable pairs; the predicate is
    # symmetric so each pair is handled once (j > i).  Roots stay the
    # minimum core index of each component.
    parent = np.arange(n, dtype=np.int64)
    core_idx = np.flatnonzero(core)
    for i in core_idx:
        row = indices[indptr[i] : indptr[i + 1]]
        for j in row[core[row] & (row > i)]:
            ri = _find(parent, int(i))
            rj = _find(parent, int(j))
            if ri != rj:
                if ri < rj:
                    parent[rj] = ri
                else:
                    parent[ri] = rj

    labels = np.full(n, -1, dtype=np.int64)
    root_to_id: dict[int, int] = {}
    for i in core_idx:
        r = _find(parent, int(i))
        if r not in root_to_id:
            root_to_id[r] = len(root_to_id)
        labels[i] = root_to_id[r]
    for i in core_idx:
        row = indices[indptr[i] : indptr[i + 1]]
        for j in row:
            if labels[j] < 0:
                labels[j] = labels[i]

    clusters = []
    for cid in range(len(root_to_id)):
        members = np.flatnonzero(labels == cid)
        clusters.append(
            Cluster(
                cluster_id=cid,
                member_indices=tuple(int(m) for m in members),
                core_flags=tuple(bool(core[m]) for m in members),
                motion=motion,
            )
        )
    noise = tuple(int(i) for i in np.flatnonzero(labels < 0))
    return Clustering(clusters=tuple(clusters), noise=noise, params=params, n_points=n)


def dbscan(
    points,
    eps_dist: float,
    n_min: int,
    motion: MotionClass = MotionClass.STATIONARY,
    method: str = "grid",
    backend: str | None = None,
) -> Clustering:
    """Position-only clustering: unlimited course and speed thresholds."""
    params = ClusterParams(eps_dist=eps_dist, n_min=n_min)
    return dbscansd(points, params, motion=motion, method=method, backend=backend)
