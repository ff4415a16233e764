# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled neighbor-search kernels.

Same contract and bit-identical output as the NumPy backend: the grid
setup is shared (imported from the fallback module) and the predicate
uses the exact same double expressions, compiled with contraction off.
"""

from libc.math cimport fabs, isfinite

import numpy as np

cimport numpy as cnp

from ._neighbors_py import grid_ranges

cnp.import_array()


def neighbor_lists_grid(
    cnp.float64_t[::1] lat,
    cnp.float64_t[::1] lon,
    cnp.float64_t[::1] speed,
    cnp.float64_t[::1] course,
    double eps_dist,
    double eps_crs,
    double eps_spd,
    bint circular,
):
    cdef Py_ssize_t n = lat.shape[0]
    indptr_arr = np.zeros(n + 1, dtype=np.int64)
    if n == 0:
        return indptr_arr, np.zeros(0, dtype=np.int64)

    order_arr, los_arr, his_arr = grid_ranges(np.asarray(lat), np.asarray(lon), eps_dist)
    cdef cnp.int64_t[::1] order = order_arr
    cdef cnp.int64_t[:, ::1] los = los_arr
    cdef cnp.int64_t[:, ::1] his = his_arr
    cdef cnp.int64_t[::1] indptr = indptr_arr

    # gather once into grid order so the candidate scan is sequential
    cdef cnp.float64_t[::1] lat_g = np.asarray(lat)[order_arr]
    cdef cnp.float64_t[::1] lon_g = np.asarray(lon)[order_arr]
    cdef cnp.float64_t[::1] speed_g = np.asarray(speed)[order_arr]
    cdef cnp.float64_t[::1] course_g = np.asarray(course)[order_arr]

    cdef double eps2 = eps_dist * eps_dist
    cdef bint check_spd = isfinite(eps_spd)
    cdef bint check_crs = isfinite(eps_crs)

    cdef Py_ssize_t cap = 4 * n if n > 256 else 1024
    buf_arr = np.empty(cap, dtype=np.int64)
    cdef cnp.int64_t[::1] buf = buf_arr

    cdef Py_ssize_t i, d, pos, lo, hi, k, m
    cdef cnp.int64_t j, key
    cdef bint sorted_row
    cdef Py_ssize_t total = 0, row_start, row_len
    cdef double plat, plon, pspeed, pcourse, dlat, dlon, dcrs, t
    for i in range(n):
        row_start = total
        sorted_row = True
        plat = lat[i]
        plon = lon[i]
        pspeed = speed[i]
        pcourse = course[i]
        for d in range(3):
            lo = los[d, i]
            hi = his[d, i]
            for pos in range(lo, hi):
                dlat = lat_g[pos] - plat
                dlon = lon_g[pos] - plon
                if not (dlat * dlat + dlon * dlon < eps2):
                    continue
                if check_spd and not (fabs(speed_g[pos] - pspeed) < eps_spd):
                    continue
                if check_crs:
                    dcrs = fabs(course_g[pos] - pcourse)
                    if circular:
                        t = 360.0 - dcrs
                        if t < dcrs:
                            dcrs = t
                    if not (dcrs < eps_crs):
                        continue
                j = order[pos]
                if total == cap:
                    cap = cap * 2
                    buf_arr = np.resize(buf_arr, cap)
                    buf = buf_arr
                if sorted_row and total > row_start and j < buf[total - 1]:
                    sorted_row = False
                buf[total] = j
                total += 1
        row_len = total - row_start
        if not sorted_row:
            if row_len <= 64:
                # insertion sort; rows are short in typical traffic data
                for k in range(row_start + 1, total):
                    key = buf[k]
                    m = k - 1
                    while m >= row_start and buf[m] > key:
                        buf[m + 1] = buf[m]
                        m -= 1
                    buf[m + 1] = key
            else:
                buf_arr[row_start:total].sort()
        indptr[i + 1] = total
    return indptr_arr, buf_arr[:total].copy()


def neighbor_lists_naive(
    cnp.float64_t[::1] lat,
    cnp.float64_t[::1] lon,
    cnp.float64_t[::1] speed,
    cnp.float64_t[::1] course,
    double eps_dist,
    double eps_crs,
    double eps_spd,
    bint circular,
):
    cdef Py_ssize_t n = lat.shape[0]
    indptr_arr = np.zeros(n + 1, dtype=np.int64)
    if n == 0:
        return indptr_arr, np.zeros(0, dtype=np.int64)
    cdef cnp.int64_t[::1] indptr = indptr_arr

    cdef double eps2 = eps_dist * eps_dist
    cdef bint check_spd = isfinite(eps_spd)
    cdef bint check_crs = isfinite(eps_crs)

    cdef Py_ssize_t cap = 4 * n if n > 256 else 1024
    buf_arr = np.empty(cap, dtype=np.int64)
    cdef cnp.int64_t[::1] buf = buf_arr

    cdef Py_ssize_t i, j
    cdef Py_ssize_t total = 0
    cdef double dlat, dlon, dcrs, t
    for i in range(n):
        for j in range(n):
            dlat = lat[j] - lat[i]
            dlon = lon[j] - lon[i]
            if not (dlat * dlat + dlon * dlon < eps2):
                continue
            if check_spd and not (fabs(speed[j] - speed[i]) < eps_spd):
                continue
            if check_crs:
                dcrs = fabs(course[j] - course[i])
                if circular:
                    t = 360.0 - dcrs
                    if t < dcrs:
                        dcrs = t
                if not (dcrs < eps_crs):
                    continue
            if total == cap:
                cap = cap * 2
                buf_arr = np.resize(buf_arr, cap)
                buf = buf_arr
            buf[total] = j
            total += 1
        indptr[i + 1] = total
    return indptr_arr, buf_arr[:total].copy()
