"""Monte Carlo harness for the distributional claims behind the scores.

The rank z-score is asymptotically standard normal under the null, and
the threshold score has closed-form null moments; this module simulates
both statistics with freshly drawn calibration sets per replication so
the claims can be checked empirically at finite sizes.  Four named
preset configurations (fig8..fig11) cover light- and heavy-tailed
deviation distributions and one-class trajectories.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import ConfigError
from .scoring import (
    CalibrationModel,
    combine_zscores,
    empirical_quantile,
    tail_score_stationary,
    threshold_score_moments,
    w_moving,
    w_stationary,
)

# family -> (parameter names, validator)
_FAMILIES: dict[str, tuple[tuple[str, ...], Callable[[tuple[float, ...]], str | None]]] = {
    "exponential": (("rate",), lambda p: None if p[0] > 0 else "rate must be > 0"),
    "gamma": (
        ("shape", "rate"),
        lambda p: None if p[0] > 0 and p[1] > 0 else "shape and rate must be > 0",
    ),
    "chi_squared": (("df",), lambda p: None if p[0] > 0 else "df must be > 0"),
    "normal": (("mu", "sigma"), lambda p: None if p[1] > 0 else "sigma must be > 0"),
    "cauchy": (("loc", "scale"), lambda p: None if p[1] > 0 else "scale must be > 0"),
    "f": (("d1", "d2"), lambda p: None if p[0] > 0 and p[1] > 0 else "d1 and d2 must be > 0"),
    "student_t": (("df",), lambda p: None if p[0] > 0 else "df must be > 0"),
    "uniform": (("low", "high"), lambda p: None if p[0] < p[1] else "low must be < high"),
}


@dataclass(frozen=True)
class DistributionSpec:
    """A named distribution family with its scalar parameters.

    gamma is shape/rate (mean shape/rate), matching the rate
    parameterization used for exponential.
    """

    family: str
    params: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.family not in _FAMILIES:
            raise ConfigError(
                f"unknown distribution family {self.family!r}; "
                f"known: {', '.join(sorted(_FAMILIES))}"
            )
        names, validator = _FAMILIES[self.family]
        if len(self.params) != len(names):
            raise ConfigError(
                f"{self.family} expects {len(names)} parameters {names}, got {self.params}"
            )
        problem = validator(self.params)
        if problem:
            raise ConfigError(f"{self.family}{self.params}: {problem}")

    def to_string(self) -> str:
        return f"{self.family}({','.join(format(p, 'g') for p in self.params)})"


def parse_distribution(text: str) -> DistributionSpec:
    """Parse compact specs like ``gamma(2,4)`` or ``student_t(2)``."""
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise ConfigError(f"malformed distribution spec {text!r}; expected family(p1,...)")
    family, _, rest = text[:-1].partition("(")
    try:
        params = tuple(float(tok) for tok in rest.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"non-numeric parameter in distribution spec {text!r}") from None
    return DistributionSpec(family=family.strip(), params=params)


def sample_distribution(spec: DistributionSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws from the distribution, reproducible from the generator state."""
    if n < 1:
        raise ConfigError(f"sample size must be >= 1, got {n}")
    p = spec.params
    if spec.family == "exponential":
        return rng.exponential(1.0 / p[0], n)
    if spec.family == "gamma":
        return rng.gamma(p[0], 1.0 / p[1], n)
    if spec.family == "chi_squared":
        return rng.chisquare(p[0], n)
    if spec.family == "normal":
        return rng.normal(p[0], p[1], n)
    if spec.family == "cauchy":
        return p[0] + p[1] * rng.standard_cauchy(n)
    if spec.family == "f":
        return rng.f(p[0], p[1], n)
    if spec.family == "student_t":
        return rng.standard_t(p[0], n)
    if spec.family == "uniform":
        return rng.uniform(p[0], p[1], n)
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class SimConfig:
    r_st: int
    r_mv: int
    m_st: int
    m_mv: int
    replications: int
    seed: int
    dist_v: DistributionSpec | None = None
    dist_y: DistributionSpec | None = None
    dist_z: DistributionSpec | None = None

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.m_st < 0 or self.m_mv < 0:
            raise ConfigError("trajectory sizes must be >= 0")
        if self.m_st == 0 and self.m_mv == 0:
            raise ConfigError("at least one of m_st, m_mv must be > 0")
        if self.m_st > 0:
            if self.dist_v is None:
                raise ConfigError("m_st > 0 requires dist_v")
            if self.r_st < 1:
                raise ConfigError("m_st > 0 requires r_st >= 1")
        if self.m_mv > 0:
            if self.dist_y is None or self.dist_z is None:
                raise ConfigError("m_mv > 0 requires dist_y and dist_z")
            if self.r_mv < 1:
                raise ConfigError("m_mv > 0 requires r_mv >= 1")

    def to_json_dict(self) -> dict:
        return {
            "r_st": self.r_st,
            "r_mv": self.r_mv,
            "m_st": self.m_st,
            "m_mv": self.m_mv,
            "replications": self.replications,
            "seed": self.seed,
            "dist_v": self.dist_v.to_string() if self.dist_v else None,
            "dist_y": self.dist_y.to_string() if self.dist_y else None,
            "dist_z": self.dist_z.to_string() if self.dist_z else None,
        }


#: Named validation configurations (5000 replications each).
PRESETS: dict[str, dict] = {
    "fig8": {
        "r_st": 1000,
        "r_mv": 1000,
        "m_st": 100,
        "m_mv": 200,
        "dist_v": "exponential(2)",
        "dist_y": "gamma(2,4)",
        "dist_z": "chi_squared(8)",
    },
    "fig9": {
        "r_st": 1000,
        "r_mv": 1000,
        "m_st": 200,
        "m_mv": 100,
        "dist_v": "normal(2,4)",
        "dist_y": "cauchy(0,1)",
        "dist_z": "f(8,18)",
    },
    "fig10": {
        "r_st": 1000,
        "r_mv": 1000,
        "m_st": 300,
        "m_mv": 0,
        "dist_v": "student_t(2)",
    },
    "fig11": {
        "r_st": 1000,
        "r_mv": 1000,
        "m_st": 0,
        "m_mv": 200,
        "dist_y": "cauchy(4,2)",
        "dist_z": "f(1,20)",
    },
}

PRESET_REPLICATIONS = 5000


def preset_config(name: str, seed: int, replications: int | None = None) -> SimConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    raw = PRESETS[name]
    return SimConfig(
        r_st=raw["r_st"],
        r_mv=raw["r_mv"],
        m_st=raw["m_st"],
        m_mv=raw["m_mv"],
        replications=PRESET_REPLICATIONS if replications is None else replications,
        seed=seed,
        dist_v=parse_distribution(raw["dist_v"]) if raw.get("dist_v") else None,
        dist_y=parse_distribution(raw["dist_y"]) if raw.get("dist_y") else None,
        dist_z=parse_distribution(raw["dist_z"]) if raw.get("dist_z") else None,
    )


@dataclass(frozen=True)
class SimResult:
    statistic: str
    t2_samples: tuple[float, ...] | None
    t1_samples: tuple[float, ...] | None
    summary: dict
    qq_pairs: tuple[tuple[float, float], ...] | None
    ks_stat: float | None
    config: dict

    @property
    def samples(self) -> tuple[float, ...]:
        return self.t2_samples if self.t2_samples is not None else self.t1_samples


def _replication_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(rep,)))


def _upper_tail(sorted_samples: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Vectorized fraction of samples >= each value (matches scoring)."""
    r = sorted_samples.shape[0]
    return (r - np.searchsorted(sorted_samples, values, side="left")) / r


def _lower_tail(sorted_samples: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Vectorized fraction of samples <= each value (matches scoring)."""
    r = sorted_samples.shape[0]
    return np.searchsorted(sorted_samples, values, side="right") / r


def _rank_zscore_once(cfg: SimConfig, rng: np.random.Generator) -> float:
    w_st = None
    w_mv = None
    if cfg.m_st > 0:
        cal_v = np.sort(sample_distribution(cfg.dist_v, cfg.r_st, rng))
        v = sample_distribution(cfg.dist_v, cfg.m_st, rng)
        w_st = w_stationary(float(_upper_tail(cal_v, v).mean()), cfg.m_st)
    if cfg.m_mv > 0:
        cal_y = np.sort(sample_distribution(cfg.dist_y, cfg.r_mv, rng))
        cal_z = np.sort(sample_distribution(cfg.dist_z, cfg.r_mv, rng))
        y = sample_distribution(cfg.dist_y, cfg.m_mv, rng)
        z = sample_distribution(cfg.dist_z, cfg.m_mv, rng)
        scores = np.minimum(_upper_tail(cal_y, y), _lower_tail(cal_z, z))
        w_mv = w_moving(float(scores.mean()), cfg.m_mv)
    return combine_zscores(w_st, w_mv)


def _threshold_score_once(cfg: SimConfig, alpha: float, rng: np.random.Generator) -> float:
    count = 0
    if cfg.m_st > 0:
        cal_v = np.sort(sample_distribution(cfg.dist_v, cfg.r_st, rng))
        thr_v = empirical_quantile(cal_v, 1 - alpha)
        v = sample_distribution(cfg.dist_v, cfg.m_st, rng)
        count += int(np.count_nonzero(v >= thr_v))
    if cfg.m_mv > 0:
        cal_y = np.sort(sample_distribution(cfg.dist_y, cfg.r_mv, rng))
        cal_z = np.sort(sample_distribution(cfg.dist_z, cfg.r_mv, rng))
        thr_y = empirical_quantile(cal_y, 1 - alpha)
        thr_z = empirical_quantile(cal_z, alpha)
        y = sample_distribution(cfg.dist_y, cfg.m_mv, rng)
        z = sample_distribution(cfg.dist_z, cfg.m_mv, rng)
        count += int(np.count_nonzero((y >= thr_y) | (z <= thr_z)))
    return count / (cfg.m_st + cfg.m_mv)


def _run_replications(
    once: Callable[[np.random.Generator], float], seed: int, replications: int, threads: int
) -> np.ndarray:
    """Replications are index-addressed so results ignore thread count."""
    out = np.empty(replications)

    def run_range(lo: int, hi: int) -> None:
        for rep in range(lo, hi):
            out[rep] = once(_replication_rng(seed, rep))

    if threads <= 1 or replications < 2 * threads:
        run_range(0, replications)
        return out
    chunk = math.ceil(replications / threads)
    bounds = [(i, min(i + chunk, replications)) for i in range(0, replications, chunk)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda b: run_range(*b), bounds))
    return out


def _summary(samples: np.ndarray) -> dict:
    return {
        "replications": int(samples.shape[0]),
        "mean": float(samples.mean()),
        "stdev": float(samples.std(ddof=1)) if samples.shape[0] > 1 else 0.0,
        "min": float(samples.min()),
        "max": float(samples.max()),
    }


def normal_qq_pairs(samples: np.ndarray) -> np.ndarray:
    """(theoretical, empirical) N(0,1) quantile pairs at (i - 1/2)/n."""
    ordered = np.sort(np.asarray(samples, dtype=np.float64))
    n = ordered.shape[0]
    theoretical = ndtri((np.arange(1, n + 1) - 0.5) / n)
    return np.column_stack([theoretical, ordered])


def standard_normal_cdf(x: np.ndarray) -> np.ndarray:
    return ndtr(x)


def ks_statistic(samples: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Sup distance between the empirical CDF and a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.shape[0]
    if n == 0:
        raise ConfigError("ks_statistic of an empty sample")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max((i / n - f).max(), (f - (i - 1) / n).max()))


def simulate_rank_zscore(cfg: SimConfig, threads: int = 1) -> SimResult:
    """Distribution of the rank z-score under the null, for cfg's sizes.

    Each replication draws fresh calibration sets and a fresh
    trajectory's worth of deviations, then assembles the statistic the
    same way scoring does.  The result carries N(0,1) Q-Q pairs and the
    KS distance to the standard normal.
    """
    samples = _run_replications(
        lambda rng: _rank_zscore_once(cfg, rng), cfg.seed, cfg.replications, threads
    )
    qq = normal_qq_pairs(samples)
    return SimResult(
        statistic="t2",
        t2_samples=tuple(float(s) for s in samples),
        t1_samples=None,
        summary=_summary(samples),
        qq_pairs=tuple((float(a), float(b)) for a, b in qq),
        ks_stat=ks_statistic(samples, standard_normal_cdf),
        config=cfg.to_json_dict(),
    )


def simulate_threshold_score(cfg: SimConfig, alpha: float = 0.05, threads: int = 1) -> SimResult:
    """Distribution of the threshold score under the null.

    Thresholds are re-estimated per replication from fresh calibration
    draws; the summary includes the closed-form moments for comparison.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    samples = _run_replications(
        lambda rng: _threshold_score_once(cfg, alpha, rng), cfg.seed, cfg.replications, threads
    )
    mean, var = threshold_score_moments(cfg.m_st, cfg.m_mv, alpha)
    summary = _summary(samples)
    summary["expected_mean"] = mean
    summary["expected_sd"] = math.sqrt(var)
    config = cfg.to_json_dict()
    config["alpha"] = alpha
    return SimResult(
        statistic="t1",
        t2_samples=None,
        t1_samples=tuple(float(s) for s in samples),
        summary=summary,
        qq_pairs=None,
        ks_stat=None,
        config=config,
    )


def min_uniform_check(
    n: int, rng: np.random.Generator, bins: int = 20
) -> tuple[float, float, np.ndarray]:
    """Moments and histogram of min(U1, U2) over n independent pairs.

    The exact density is 2(1 - a) on [0, 1], with mean 1/3 and variance
    1/18; the histogram supports goodness-of-fit against it.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    u = rng.random((n, 2))
    a = u.min(axis=1)
    mean = float(a.mean())
    var = float(a.var(ddof=1)) if n > 1 else 0.0
    hist, _ = np.histogram(a, bins=bins, range=(0.0, 1.0))
    return mean, var, hist


def null_stationary_scores(
    r: int, n: int, spec: DistributionSpec, rng: np.random.Generator
) -> np.ndarray:
    """n i.i.d. draws of the stationary tail score under the null.

    Each score gets its own fresh calibration sample of size r, so the
    scores are independent and each is uniform on {0, 1/r, ..., 1}.
    Goes through the real scoring code path.
    """
    out = np.empty(n)
    for i in range(n):
        cal = CalibrationModel(
            add_samples=tuple(np.sort(sample_distribution(spec, r, rng))),
            rdd_samples=(),
            cdd_samples=(),
            alpha=0.05,
            add_threshold=None,
            rdd_threshold=None,
            cdd_threshold=None,
        )
        value = float(sample_distribution(spec, 1, rng)[0])
        out[i] = tail_score_stationary(value, cal)
    return out
