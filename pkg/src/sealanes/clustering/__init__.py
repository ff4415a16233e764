"""Density-based clustering of track points (position + speed + course)."""

from .core import (
    Cluster,
    ClusterParams,
    Clustering,
    dbscan,
    dbscansd,
    point_arrays,
    query_neighbors,
)
from .merge_loop import ClusterDraft, dbscansd_merge_loop, merge_clusters
from .neighbors import backend_name, neighbor_lists

__all__ = [
    "Cluster",
    "ClusterDraft",
    "ClusterParams",
    "Clustering",
    "backend_name",
    "dbscan",
    "dbscansd",
    "dbscansd_merge_loop",
    "merge_clusters",
    "neighbor_lists",
    "point_arrays",
    "query_neighbors",
]
