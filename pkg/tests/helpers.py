"""Synthetic AIS data builders shared across the test modules."""

from __future__ import annotations

import math

import numpy as np

from sealanes.track import TrackPoint


def make_corridor(
    rng: np.random.Generator,
    n: int,
    start_lat: float,
    start_lon: float,
    heading_deg: float,
    length: float,
    lateral_sd: float = 0.004,
    speed_mean: float = 10.0,
    speed_sd: float = 0.5,
    course_sd: float = 4.0,
) -> list[TrackPoint]:
    """Moving points scattered along a straight lane with the given heading."""
    theta = math.radians(heading_deg)
    north, east = math.cos(theta), math.sin(theta)
    along = rng.uniform(0.0, length, n)
    across = rng.normal(0.0, lateral_sd, n)
    lat = start_lat + along * north - across * east
    lon = start_lon + along * east + across * north
    speed = np.maximum(rng.normal(speed_mean, speed_sd, n), 0.5)
    course = np.mod(rng.normal(heading_deg, course_sd, n), 360.0)
    return [
        TrackPoint(lat=float(a), lon=float(b), speed=float(s), course=float(c))
        for a, b, s, c in zip(lat, lon, speed, course)
    ]


def make_anchorage(
    rng: np.random.Generator,
    n: int,
    lat0: float,
    lon0: float,
    spread: float = 0.01,
    speed_max: float = 0.4,
) -> list[TrackPoint]:
    """Stationary points (speed < 0.5) spread around an anchorage."""
    lat = lat0 + rng.normal(0.0, spread, n)
    lon = lon0 + rng.normal(0.0, spread, n)
    speed = rng.uniform(0.0, speed_max, n)
    course = rng.uniform(0.0, 360.0, n)
    return [
        TrackPoint(lat=float(a), lon=float(b), speed=float(s), course=float(c))
        for a, b, s, c in zip(lat, lon, speed, course)
    ]


def random_points(rng: np.random.Generator, n: int, box: float = 1.0) -> list[TrackPoint]:
    """Uniformly random points for clustering stress tests."""
    lat = rng.uniform(0.0, box, n)
    lon = rng.uniform(0.0, box, n)
    speed = rng.uniform(0.0, 15.0, n)
    course = rng.uniform(0.0, 360.0, n)
    return [
        TrackPoint(lat=float(a), lon=float(b), speed=float(s), course=float(c))
        for a, b, s, c in zip(lat, lon, speed, course)
    ]


def points_to_csv(points_by_vessel: dict[str, list[TrackPoint]]) -> str:
    """Render vessels' points as a MarineCadastre-style CSV string."""
    lines = ["MMSI,BaseDateTime,LAT,LON,SOG,COG"]
    for mmsi, pts in points_by_vessel.items():
        for k, p in enumerate(pts):
            ts = f"2017-01-01T{k // 3600:02d}:{(k // 60) % 60:02d}:{k % 60:02d}"
            lines.append(f"{mmsi},{ts},{p.lat!r},{p.lon!r},{p.speed!r},{p.course!r}")
    return "\n".join(lines) + "\n"
