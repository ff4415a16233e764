"""Pure-NumPy neighbor-search kernels.

Both kernels return CSR arrays (indptr, indices) with each row sorted
ascending and containing the query point itself.  The grid kernel must
stay bit-identical to the compiled kernel and to the naive scan: the
grid setup here is shared with the compiled backend, and the comparison
expressions are written identically in both (no reassociation).
"""

from __future__ import annotations

import math

import numpy as np


def grid_ranges(lat: np.ndarray, lon: np.ndarray, cell: float):
    """Candidate ranges for a uniform grid of the given cell size.

    Buckets points into cells of side ``cell`` and, for every point and
    each of the three adjacent lat-cell rows, computes one contiguous
    range of the key-sorted point order containing all candidate
    neighbors.  Returns (order, los, his) with los/his shaped (3, n).
    """
    lat0 = lat.min()
    lon0 = lon.min()
    ix = np.floor((lat - lat0) / cell).astype(np.int64)
    iy = np.floor((lon - lon0) / cell).astype(np.int64)
    nx = int(ix.max()) + 1
    ny = int(iy.max()) + 1
    key = ix * ny + iy
    order = np.argsort(key, kind="stable").astype(np.int64)
    skey = key[order]

    n = lat.shape[0]
    cy_lo = np.maximum(iy - 1, 0)
    cy_hi = np.minimum(iy + 1, ny - 1)
    los = np.zeros((3, n), dtype=np.int64)
    his = np.zeros((3, n), dtype=np.int64)
    for d, dx in enumerate((-1, 0, 1)):
        cx = ix + dx
        valid = (cx >= 0) & (cx < nx)
        base = cx * ny
        lo = np.searchsorted(skey, base + cy_lo, side="left")
        hi = np.searchsorted(skey, base + cy_hi, side="right")
        los[d] = np.where(valid, lo, 0)
        his[d] = np.where(valid, hi, 0)
    return order, los, his


def _row_mask(
    cand: np.ndarray,
    i: int,
    lat: np.ndarray,
    lon: np.ndarray,
    speed: np.ndarray,
    course: np.ndarray,
    eps2: float,
    eps_crs: float,
    eps_spd: float,
    circular: bool,
) -> np.ndarray:
    dlat = lat[cand] - lat[i]
    dlon = lon[cand] - lon[i]
    mask = (dlat * dlat + dlon * dlon) < eps2
    if math.isfinite(eps_spd):
        mask &= np.abs(speed[cand] - speed[i]) < eps_spd
    if math.isfinite(eps_crs):
        d = np.abs(course[cand] - course[i])
        if circular:
            d = np.minimum(d, 360.0 - d)
        mask &= d < eps_crs
    return mask


def neighbor_lists_naive(
    lat: np.ndarray,
    lon: np.ndarray,
    speed: np.ndarray,
    course: np.ndarray,
    eps_dist: float,
    eps_crs: float,
    eps_spd: float,
    circular: bool,
) -> tuple[np.ndarray, np.ndarray]:
    n = lat.shape[0]
    eps2 = eps_dist * eps_dist
    all_idx = np.arange(n, dtype=np.int64)
    rows = []
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        mask = _row_mask(all_idx, i, lat, lon, speed, course, eps2, eps_crs, eps_spd, circular)
        row = all_idx[mask]
        rows.append(row)
        indptr[i + 1] = indptr[i] + row.shape[0]
    indices = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    return indptr, indices


def neighbor_lists_grid(
    lat: np.ndarray,
    lon: np.ndarray,
    speed: np.ndarray,
    course: np.ndarray,
    eps_dist: float,
    eps_crs: float,
    eps_spd: float,
    circular: bool,
) -> tuple[np.ndarray, np.ndarray]:
    n = lat.shape[0]
    if n == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    eps2 = eps_dist * eps_dist
    order, los, his = grid_ranges(lat, lon, eps_dist)

    rows = []
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        parts = [order[los[d, i] : his[d, i]] for d in range(3)]
        cand = np.concatenate(parts)
        mask = _row_mask(cand, i, lat, lon, speed, course, eps2, eps_crs, eps_spd, circular)
        row = np.sort(cand[mask])
        rows.append(row)
        indptr[i + 1] = indptr[i] + row.shape[0]
    indices = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    return indptr, indices
