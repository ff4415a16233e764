#!/usr/bin/env python3
"""Benchmark the neighbor-search kernels: compiled vs pure Python, grid vs naive.

The workload is AIS-like: a few dense traffic lanes plus an anchorage,
clustered with the default thresholds.  Run after building the package
(the compiled rows are skipped when the extension is unavailable).

    python benchmarks/bench_neighbors.py --n 50000 --repeat 3
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from sealanes.clustering.neighbors import _compiled, neighbor_lists


def make_workload(n: int, seed: int = 7) -> tuple[np.ndarray, ...]:
    rng = np.random.default_rng(seed)
    lane_specs = [
        (36.0 + 0.6 * k, -75.5 + 0.3 * k, heading)
        for k, heading in enumerate((45.0, 270.0, 135.0, 10.0, 200.0, 320.0))
    ]
    per = (n - n // 10) // len(lane_specs)
    lanes = []
    for start_lat, start_lon, heading in lane_specs:
        theta = math.radians(heading)
        along = rng.uniform(0.0, 1.5, per)
        across = rng.normal(0.0, 0.006, per)
        lat = start_lat + along * math.cos(theta) - across * math.sin(theta)
        lon = start_lon + along * math.sin(theta) + across * math.cos(theta)
        speed = rng.normal(10.0, 0.5, per)
        course = np.mod(rng.normal(heading, 4.0, per), 360.0)
        lanes.append((lat, lon, speed, course))
    rest = n - len(lane_specs) * per
    lanes.append(
        (
            38.9 + rng.normal(0.0, 0.03, rest),
            -74.9 + rng.normal(0.0, 0.03, rest),
            rng.uniform(0.0, 0.4, rest),
            rng.uniform(0.0, 360.0, rest),
        )
    )
    return tuple(np.concatenate(parts) for parts in zip(*lanes))


def bench(fn, repeat: int) -> tuple[float, tuple]:
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=50_000)
    parser.add_argument("--naive-n", type=int, default=4_000, help="size for the naive rows")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    thresholds = dict(eps_dist=0.02, eps_crs=90.0, eps_spd=2.5, circular=True)
    backends = ["python"] + (["compiled"] if _compiled is not None else [])
    if _compiled is None:
        print("note: compiled kernel unavailable, benchmarking the Python backend only")

    lat, lon, speed, course = make_workload(args.n)
    print(f"\ngrid kernel, n={args.n}")
    reference = None
    for backend in backends:
        secs, out = bench(
            lambda: neighbor_lists(
                lat, lon, speed, course, method="grid", backend=backend, **thresholds
            ),
            args.repeat,
        )
        if reference is None:
            reference = out
            check = "reference"
        else:
            same = np.array_equal(reference[0], out[0]) and np.array_equal(reference[1], out[1])
            check = "identical output" if same else "OUTPUT MISMATCH"
        print(f"  {backend:>8}: {secs:8.3f}s  ({args.n / secs:,.0f} points/s, {check})")

    nlat, nlon, nspeed, ncourse = (a[: args.naive_n] for a in (lat, lon, speed, course))
    print(f"\nnaive kernel, n={args.naive_n}")
    for backend in backends:
        secs, _ = bench(
            lambda: neighbor_lists(
                nlat, nlon, nspeed, ncourse, method="naive", backend=backend, **thresholds
            ),
            args.repeat,
        )
        print(f"  {backend:>8}: {secs:8.3f}s  ({args.naive_n / secs:,.0f} points/s)")


if __name__ == "__main__":
    main()
