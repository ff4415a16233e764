"""Trajectory anomaly statistics and their calibration.

Calibration runs the deviation metrics over a held-out dataset and
keeps the sorted samples.  Two statistics are computed per trajectory:

* the threshold score: the fraction of points whose deviation crosses a
  calibrated empirical-quantile threshold (ADD/RDD above their 95th
  percentile, CDD below its 5th); and
* the rank z-score: each point is scored by the fraction of calibration
  samples more extreme than it (for moving points, the smaller of the
  RDD and CDD tails); the per-class means are centered and scaled by
  the exact moments of a uniform (mean 1/2, var 1/12) and a min of two
  uniforms (mean 1/3, var 1/18), giving z-scores that are combined as
  (W_st + W_mv)/sqrt(2) when both classes are present.

Under the null the rank z-score is asymptotically standard normal, so
large negative values are directly interpretable; the threshold score's
null mean and variance have closed forms (threshold_score_moments).
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .deviations import PointDeviation, point_deviation
from .errors import ConfigError, ModelError, SchemaError
from .patterns import PatternModel
from .track import MotionClass, Trajectory

#: On-disk calibration model format.
CALIBRATION_FORMAT_VERSION = 1


def empirical_quantile(sorted_samples: Sequence[float], gamma: float) -> float:
    """Lower nearest-rank quantile: value at 1-based index ceil(gamma * r).

    The 1e-9 guard keeps ranks exact when gamma * r is integral up to
    float noise (e.g. 0.95 * 100).
    """
    r = len(sorted_samples)
    if r == 0:
        raise ConfigError("quantile of an empty sample")
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"quantile level must be in (0, 1), got {gamma}")
    k = math.ceil(gamma * r - 1e-9)
    return sorted_samples[min(max(k, 1), r) - 1]


@dataclass(frozen=True)
class CalibrationModel:
    """Sorted deviation samples from the calibration dataset plus thresholds."""

    add_samples: tuple[float, ...]
    rdd_samples: tuple[float, ...]
    cdd_samples: tuple[float, ...]
    alpha: float
    add_threshold: float | None
    rdd_threshold: float | None
    cdd_threshold: float | None

    @property
    def r_st(self) -> int:
        return len(self.add_samples)

    @property
    def r_mv(self) -> int:
        return len(self.rdd_samples)

    def to_json_dict(self) -> dict:
        return {
            "version": CALIBRATION_FORMAT_VERSION,
            "alpha": self.alpha,
            "add_samples": list(self.add_samples),
            "rdd_samples": list(self.rdd_samples),
            "cdd_samples": list(self.cdd_samples),
            "add_threshold": self.add_threshold,
            "rdd_threshold": self.rdd_threshold,
            "cdd_threshold": self.cdd_threshold,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CalibrationModel":
        if d.get("version") != CALIBRATION_FORMAT_VERSION:
            raise SchemaError(
                f"calibration format version {d.get('version')} != {CALIBRATION_FORMAT_VERSION}"
            )
        return cls(
            add_samples=tuple(d["add_samples"]),
            rdd_samples=tuple(d["rdd_samples"]),
            cdd_samples=tuple(d["cdd_samples"]),
            alpha=d["alpha"],
            add_threshold=d["add_threshold"],
            rdd_threshold=d["rdd_threshold"],
            cdd_threshold=d["cdd_threshold"],
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "CalibrationModel":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def calibrate(
    trajectories: Sequence[Trajectory],
    model: PatternModel,
    alpha: float = 0.05,
    course_mode: str | None = None,
) -> CalibrationModel:
    """Build a CalibrationModel from held-out trajectories.

    ADD is collected over all stationary points, RDD and CDD over all
    moving points; thresholds are the (1 - alpha) nearest-rank quantile
    of the ADD and RDD samples and the alpha quantile of CDD.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    mode = course_mode or model.build_params.get("course_mode", "circular")
    adds: list[float] = []
    rdds: list[float] = []
    cdds: list[float] = []
    for traj in trajectories:
        for p in traj.points:
            dev = point_deviation(p, model, mode)
            if dev.motion is MotionClass.STATIONARY:
                adds.append(dev.add)
            else:
                rdds.append(dev.rdd)
                cdds.append(dev.cdd)
    if not adds and not rdds:
        raise ConfigError("calibration dataset produced no deviation samples")
    adds.sort()
    rdds.sort()
    cdds.sort()
    return CalibrationModel(
        add_samples=tuple(adds),
        rdd_samples=tuple(rdds),
        cdd_samples=tuple(cdds),
        alpha=alpha,
        add_threshold=empirical_quantile(adds, 1 - alpha) if adds else None,
        rdd_threshold=empirical_quantile(rdds, 1 - alpha) if rdds else None,
        cdd_threshold=empirical_quantile(cdds, alpha) if cdds else None,
    )


def threshold_flag(dev: PointDeviation, cal: CalibrationModel) -> int:
    """1 when the point's deviation crosses its calibrated threshold."""
    if dev.motion is MotionClass.STATIONARY:
        if cal.add_threshold is None:
            raise ModelError("calibration has no ADD samples for stationary points")
        return int(dev.add > cal.add_threshold)
    if cal.rdd_threshold is None or cal.cdd_threshold is None:
        raise ModelError("calibration has no RDD/CDD samples for moving points")
    return int(dev.rdd > cal.rdd_threshold or dev.cdd < cal.cdd_threshold)


def tail_score_stationary(add_value: float, cal: CalibrationModel) -> float:
    """Fraction of calibration ADD samples >= the observed value."""
    if cal.r_st == 0:
        raise ModelError("calibration has no ADD samples")
    return (cal.r_st - bisect_left(cal.add_samples, add_value)) / cal.r_st


def tail_score_moving(rdd_value: float, cdd_value: float, cal: CalibrationModel) -> float:
    """Smaller of the RDD upper-tail and CDD lower-tail fractions."""
    if cal.r_mv == 0:
        raise ModelError("calibration has no RDD/CDD samples")
    rdd_tail = (cal.r_mv - bisect_left(cal.rdd_samples, rdd_value)) / cal.r_mv
    cdd_tail = bisect_right(cal.cdd_samples, cdd_value) / cal.r_mv
    return min(rdd_tail, cdd_tail)


def w_stationary(mean_score: float, m_st: int) -> float:
    return (mean_score - 0.5) / math.sqrt(1.0 / (12.0 * m_st))


def w_moving(mean_score: float, m_mv: int) -> float:
    return (mean_score - 1.0 / 3.0) / math.sqrt(1.0 / (18.0 * m_mv))


def combine_zscores(w_st: float | None, w_mv: float | None) -> float:
    """W_st or W_mv alone, or their sum over sqrt(2) when both exist."""
    if w_st is None and w_mv is None:
        raise ConfigError("no points to combine")
    if w_mv is None:
        return w_st
    if w_st is None:
        return w_mv
    return (w_st + w_mv) / math.sqrt(2.0)


def threshold_score_moments(m_st: int, m_mv: int, alpha: float = 0.05) -> tuple[float, float]:
    """Null mean and variance of the threshold score for given class sizes."""
    m = m_st + m_mv
    if m <= 0:
        raise ConfigError("trajectory has no points")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    mean = alpha + (m_mv / m) * (alpha - alpha * alpha)
    var = (
        m_st * alpha * (1 - alpha)
        + 2 * m_mv * alpha * (1 - alpha)
        + m_mv * alpha * alpha * (1 - alpha * alpha)
    ) / (m * m)
    return mean, var


@dataclass(frozen=True)
class TrajectoryScore:
    trajectory_id: str
    m_st: int
    m_mv: int
    threshold_score: float
    rank_zscore: float
    w_st: float | None
    w_mv: float | None
    per_point: tuple[tuple[int, float], ...]

    def to_json_dict(self) -> dict:
        return {
            "trajectory_id": self.trajectory_id,
            "m_st": self.m_st,
            "m_mv": self.m_mv,
            "threshold_score": self.threshold_score,
            "rank_zscore": self.rank_zscore,
            "w_st": self.w_st,
            "w_mv": self.w_mv,
            "per_point": [list(pair) for pair in self.per_point],
        }


def score_trajectory(
    trajectory: Trajectory,
    model: PatternModel,
    cal: CalibrationModel,
    course_mode: str | None = None,
) -> TrajectoryScore:
    """Compute both anomaly statistics for one trajectory."""
    if len(trajectory.points) == 0:
        raise ConfigError(f"trajectory {trajectory.id} is empty")
    mode = course_mode or model.build_params.get("course_mode", "circular")

    flags: list[int] = []
    tail_scores: list[float] = []
    st_scores: list[float] = []
    mv_scores: list[float] = []
    for p in trajectory.points:
        dev = point_deviation(p, model, mode)
        flags.append(threshold_flag(dev, cal))
        if dev.motion is MotionClass.STATIONARY:
            s = tail_score_stationary(dev.add, cal)
            st_scores.append(s)
        else:
            s = tail_score_moving(dev.rdd, dev.cdd, cal)
            mv_scores.append(s)
        tail_scores.append(s)

    m_st = len(st_scores)
    m_mv = len(mv_scores)
    w_st = w_stationary(sum(st_scores) / m_st, m_st) if m_st else None
    w_mv = w_moving(sum(mv_scores) / m_mv, m_mv) if m_mv else None
    return TrajectoryScore(
        trajectory_id=trajectory.id,
        m_st=m_st,
        m_mv=m_mv,
        threshold_score=sum(flags) / len(flags),
        rank_zscore=combine_zscores(w_st, w_mv),
        w_st=w_st,
        w_mv=w_mv,
        per_point=tuple(zip(flags, tail_scores)),
    )


def threshold_score(
    trajectory: Trajectory,
    model: PatternModel,
    cal: CalibrationModel,
    course_mode: str | None = None,
) -> float:
    """Fraction of the trajectory's points beyond their thresholds."""
    return score_trajectory(trajectory, model, cal, course_mode).threshold_score


def rank_zscore(
    trajectory: Trajectory,
    model: PatternModel,
    cal: CalibrationModel,
    course_mode: str | None = None,
) -> float:
    """Rank-based anomaly z-score; large negative means anomalous."""
    return score_trajectory(trajectory, model, cal, course_mode).rank_zscore
