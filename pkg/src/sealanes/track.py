"""Track-point types and the flat-earth geometry used everywhere else.

Positions are raw decimal degrees and distances are Euclidean in degree
space; the clustering thresholds are expressed in the same units, so no
geodesic correction is applied.  Courses are degrees clockwise from
north in [0, 360).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum

#: Speed (knots) below which a point counts as stationary.
STATIONARY_SPEED_KNOTS = 0.5

#: Accepted values for every ``course_mode`` argument in the package.
COURSE_MODES = ("plain", "circular")


class MotionClass(Enum):
    STATIONARY = "stationary"
    MOVING = "moving"


def check_course_mode(mode: str) -> str:
    if mode not in COURSE_MODES:
        from .errors import ConfigError

        raise ConfigError(f"course_mode must be one of {COURSE_MODES}, got {mode!r}")
    return mode


@dataclass(frozen=True)
class TrackPoint:
    """One AIS observation: position, speed over ground, course over ground."""

    lat: float
    lon: float
    speed: float
    course: float
    timestamp: datetime | None = None
    vessel_id: str | None = None

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"lat {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"lon {self.lon} outside [-180, 180]")
        if not self.speed >= 0.0:
            raise ValueError(f"speed {self.speed} is negative")
        if not 0.0 <= self.course < 360.0:
            raise ValueError(f"course {self.course} outside [0, 360)")


@dataclass(frozen=True)
class Trajectory:
    """Ordered track points reported by one vessel."""

    id: str
    points: tuple[TrackPoint, ...]

    def __post_init__(self) -> None:
        stamped = [p.timestamp for p in self.points if p.timestamp is not None]
        for a, b in zip(stamped, stamped[1:]):
            if b < a:
                raise ValueError(f"trajectory {self.id}: timestamps decrease")

    def __len__(self) -> int:
        return len(self.points)


def euclid_dist(a: TrackPoint, b: TrackPoint) -> float:
    """Euclidean distance between two points' (lat, lon), in degrees."""
    dlat = a.lat - b.lat
    dlon = a.lon - b.lon
    return math.sqrt(dlat * dlat + dlon * dlon)


def course_diff(c1: float, c2: float, mode: str = "circular") -> float:
    """Difference between two courses in degrees.

    ``plain`` is the absolute difference |c1 - c2|; ``circular`` wraps
    around north, so the result never exceeds 180.
    """
    d = abs(c1 - c2)
    if mode == "plain":
        return d
    if mode == "circular":
        return min(d, 360.0 - d)
    check_course_mode(mode)
    raise AssertionError("unreachable")


def classify_motion(p: TrackPoint) -> MotionClass:
    """Stationary below 0.5 knots, moving at or above it."""
    if p.speed < STATIONARY_SPEED_KNOTS:
        return MotionClass.STATIONARY
    return MotionClass.MOVING
