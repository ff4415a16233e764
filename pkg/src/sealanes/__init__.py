"""Maritime traffic pattern learning and trajectory anomaly scoring.

Pipeline: ingest AIS CSV -> density-based clustering of stationary and
moving points -> gravity vectors and stationary sampling points ->
empirical calibration -> two per-trajectory anomaly statistics (a
threshold-count fraction and a rank-based z-score), plus a Monte Carlo
harness validating their null distributions.
"""

__version__ = "0.1.0"

from .clustering import ClusterParams, Clustering, dbscan, dbscansd
from .ingest import Dataset, group_trajectories, parse_ais_csv, split_by_motion
from .patterns import PatternModel, build_pattern_model
from .scoring import CalibrationModel, calibrate, rank_zscore, score_trajectory, threshold_score
from .track import MotionClass, TrackPoint, Trajectory

__all__ = [
    "CalibrationModel",
    "ClusterParams",
    "Clustering",
    "Dataset",
    "MotionClass",
    "PatternModel",
    "TrackPoint",
    "Trajectory",
    "__version__",
    "build_pattern_model",
    "calibrate",
    "dbscan",
    "dbscansd",
    "group_trajectories",
    "parse_ais_csv",
    "rank_zscore",
    "score_trajectory",
    "split_by_motion",
    "threshold_score",
]
