"""Backend selection for the neighbor-search kernels.

The compiled Cython kernel is preferred when it imported cleanly; the
NumPy implementation is the fallback and produces bit-identical output.
Set SEALANES_PURE_PYTHON=1 to force the fallback (used by the
benchmark to compare both).
"""

from __future__ import annotations

import os

import numpy as np

from . import _neighbors_py

_compiled = None
if not os.environ.get("SEALANES_PURE_PYTHON"):
    try:
        from . import _neighbors_cy as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None


def backend_name() -> str:
    return "compiled" if _compiled is not None else "python"


def neighbor_lists(
    lat: np.ndarray,
    lon: np.ndarray,
    speed: np.ndarray,
    course: np.ndarray,
    *,
    eps_dist: float,
    eps_crs: float,
    eps_spd: float,
    circular: bool,
    method: str = "grid",
    backend: str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """All-points neighbor query under the distance/course/speed thresholds.

    Returns CSR arrays (indptr, indices); row i holds the sorted indices
    of points within eps_dist, eps_crs, and eps_spd of point i (strict
    inequalities), always including i itself.
    """
    if method not in ("grid", "naive"):
        raise ValueError(f"unknown neighbor search method {method!r}")
    mod = _neighbors_py
    if backend is None:
        if _compiled is not None:
            mod = _compiled
    elif backend == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled neighbor kernel is not available")
        mod = _compiled
    elif backend != "python":
        raise ValueError(f"unknown backend {backend!r}")
    args = (
        np.ascontiguousarray(lat, dtype=np.float64),
        np.ascontiguousarray(lon, dtype=np.float64),
        np.ascontiguousarray(speed, dtype=np.float64),
        np.ascontiguousarray(course, dtype=np.float64),
        float(eps_dist),
        float(eps_crs),
        float(eps_spd),
        bool(circular),
    )
    if method == "grid":
        return mod.neighbor_lists_grid(*args)
    return mod.neighbor_lists_naive(*args)
