"""Logistic-growth forecasting of the year a spreading policy goes national.

The cumulative fraction of adopting states follows

    P(t) = K P0 e^{rt} / (K + P0 (e^{rt} - 1)),   K = 1,

with ``t`` in years since the first adoption.  Each forecast trial draws a
smooth bootstrap of the observed adoption years, fits ``(r, P0)`` by grid
search on squared error, draws a national-action threshold from the
historical pool and inverts the fitted curve at that threshold.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._parallel import run_trials
from ._rng import trial_rng
from .corpus import N_STATES, Corpus, PolicyRecord, national_threshold

K = 1.0


@dataclass(frozen=True)
class LogisticCurve:
    p0: float
    r: float
    t0: float = 0.0  # calendar year at t = 0

    def __post_init__(self):
        if not 0.0 < self.p0 <= K:
            raise ValueError(f"P0 must lie in (0, {K}], got {self.p0}")
        if not self.r > 0.0:
            raise ValueError(f"growth rate must be positive, got {self.r}")

    def __call__(self, t):
        return eval_curve(self, t)


def eval_curve(curve: LogisticCurve, t):
    """Adopted fraction ``t`` years after the curve's origin.

    Evaluated as ``P0 / (P0 + (K - P0) e^{-rt})``, which is algebraically the
    usual form but cannot overflow for large ``rt``.
    """
    p0 = curve.p0
    with np.errstate(over="ignore"):
        e = np.exp(-curve.r * np.asarray(t, dtype=float))
    out = K * p0 / (p0 + (K - p0) * e)
    return float(out) if np.ndim(out) == 0 else out


def sse(curve: LogisticCurve, t, y) -> float:
    """Sum of squared residuals between observed fractions ``y(t)`` and the curve."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size == 0:
        raise ValueError("series must be non-empty")
    return float(np.sum((y - eval_curve(curve, t)) ** 2))


def _default_r_grid():
    return np.logspace(np.log10(1e-3), np.log10(3.0), 400)


def _default_p0_grid():
    return np.logspace(np.log10(1 / 500), np.log10(0.2), 100)


@dataclass(frozen=True)
class FitConfig:
    r_grid: np.ndarray = field(default_factory=_default_r_grid)
    p0_grid: np.ndarray = field(default_factory=_default_p0_grid)
    trials: int = 1000
    noise_sd: float = 1.0
    seed: int = 0
    horizon_years: int = 200

    def __post_init__(self):
        for name in ("r_grid", "p0_grid"):
            g = np.asarray(getattr(self, name), dtype=float)
            if g.ndim != 1 or g.size == 0:
                raise ValueError(f"{name} must be a non-empty 1-d grid")
            if not (g > 0).all():
                raise ValueError(f"{name} must be strictly positive")
            object.__setattr__(self, name, np.sort(g))
        if (self.p0_grid > K).any():
            raise ValueError("P0 grid values cannot exceed the carrying capacity")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")


@dataclass(frozen=True)
class Series:
    t: np.ndarray  # years since t0
    y: np.ndarray  # cumulative adopted fraction
    t0: float = 0.0


def grid_sse(t, y, r_grid, p0_grid) -> np.ndarray:
    """SSE for every ``(r, P0)`` grid pair, shape ``(len(r_grid), len(p0_grid))``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    r_grid = np.asarray(r_grid, dtype=float)
    p0_grid = np.asarray(p0_grid, dtype=float)
    with np.errstate(over="ignore"):
        e = np.exp(-np.outer(r_grid, t))  # (R, m)
    odds = (K - p0_grid) / p0_grid  # P = K / (1 + odds * e)
    resid = odds[None, :, None] * e[:, None, :]
    resid += 1.0
    np.divide(K, resid, out=resid)
    resid -= y
    return np.einsum("ijk,ijk->ij", resid, resid)


def fit_curve(series: Series, config: FitConfig | None = None) -> LogisticCurve:
    """Grid-search least-squares fit of ``(r, P0)``.

    Ties go to the smaller ``r``, then the smaller ``P0``.
    """
    config = config or FitConfig()
    t = np.asarray(series.t, dtype=float)
    y = np.asarray(series.y, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two points to fit a growth curve")
    if not ((y > 0) & (y <= K)).all():
        raise ValueError("fractions must lie in (0, 1]")
    order = np.argsort(t, kind="stable")
    if np.any(np.diff(y[order]) < 0):
        raise ValueError("cumulative fractions must be non-decreasing in time")
    table = grid_sse(t, y, config.r_grid, config.p0_grid)
    i, j = np.unravel_index(int(np.argmin(table)), table.shape)  # row-major: r first
    return LogisticCurve(float(config.p0_grid[j]), float(config.r_grid[i]), series.t0)


def smooth_bootstrap(events, rng, noise_sd: float = 1.0) -> np.ndarray:
    """Resample ``m`` adoption years with replacement and add Normal(0, sd) noise."""
    events = np.asarray(events, dtype=float)
    if events.size == 0:
        raise ValueError("cannot bootstrap an empty event list")
    picks = events[rng.integers(0, events.size, events.size)]
    return picks + rng.normal(0.0, 1.0, events.size) * noise_sd


def sample_to_series(sample) -> Series:
    """Sorted sample values ``v_i`` become points ``(v_i - min v, i / 50)``."""
    v = np.sort(np.asarray(sample, dtype=float))
    if v.size == 0:
        raise ValueError("empty sample")
    return Series(v - v[0], np.arange(1, v.size + 1) / N_STATES, float(v[0]))


@dataclass(frozen=True)
class ThresholdPool:
    thresholds: tuple[int, ...]

    def __post_init__(self):
        if not self.thresholds:
            raise ValueError("threshold pool is empty")
        bad = [x for x in self.thresholds if not 1 <= x < N_STATES]
        if bad:
            raise ValueError(f"thresholds must lie in [1, {N_STATES}): {bad}")

    @classmethod
    def from_corpus(cls, corpus: Corpus, exclude: str | None = None) -> ThresholdPool:
        """Historical thresholds of every national-action policy, optionally leaving one out."""
        return cls(tuple(
            national_threshold(p) for p in corpus.policies
            if p.national_year is not None and p.id != exclude
        ))

    @property
    def mean(self) -> float:
        return float(np.mean(self.thresholds))


def sample_threshold(pool: ThresholdPool, rng) -> int:
    return pool.thresholds[int(rng.integers(0, len(pool.thresholds)))]


def crossing_time(curve: LogisticCurve, threshold: int) -> float:
    """Years after the origin at which the curve reaches ``threshold / 50``."""
    p_th = threshold / N_STATES
    if not 0.0 < p_th < K:
        raise ValueError(f"threshold fraction {p_th} is unreachable (must be in (0, {K}))")
    p0 = curve.p0
    return math.log(p_th * (K - p0) / (p0 * (K - p_th))) / curve.r


def crossing_year(curve: LogisticCurve, threshold: int, t0_year: float, horizon: float):
    """Calendar year of the threshold crossing, or ``None`` when beyond ``horizon``.

    A crossing during a year counts for that year (ceiling).  Thresholds the
    curve already meets at its origin map to the origin year.
    """
    t = max(crossing_time(curve, threshold), 0.0)
    year = math.ceil(t0_year + t)
    return None if year > horizon else year


@dataclass(frozen=True)
class ForecastTrial:
    curve: LogisticCurve
    threshold: int
    crossing_year: int | None  # None: censored
    surpassed: bool = False  # threshold already met inside the bootstrap sample


def summarize(trials, reference_year: int | None = None) -> dict:
    """Summary statistics of a list of forecast trials.

    Densities are fractions of all trials; censored trials are counted only in
    ``censored_fraction``.  Window statistics are centred on ``reference_year``
    (the modal year unless given).
    """
    n = len(trials)
    if n == 0:
        raise ValueError("no trials to summarize")
    years = [tr.crossing_year for tr in trials if tr.crossing_year is not None]
    counts = Counter(years)
    summary = {
        "trials": n,
        "censored_fraction": (n - len(years)) / n,
        "modal_year": None,
        "modal_density": 0.0,
        "reference_year": reference_year,
        "density_within_2y": 0.0,
        "density_10y_or_later": 0.0,
        "median_year_from_cdf": None,
    }
    if not years:
        return summary
    modal_count = max(counts.values())
    modal = min(y for y, c in counts.items() if c == modal_count)
    ref = modal if reference_year is None else reference_year
    cum = 0
    median = None
    for y in sorted(counts):
        cum += counts[y]
        if 2 * cum >= n:
            median = y
            break
    summary.update(
        modal_year=modal,
        modal_density=modal_count / n,
        reference_year=ref,
        density_within_2y=sum(1 for y in years if abs(y - ref) <= 2) / n,
        density_10y_or_later=sum(1 for y in years if y >= ref + 10) / n,
        median_year_from_cdf=median,
    )
    return summary


@dataclass(frozen=True)
class ForecastEnsemble:
    policy_id: str
    train_n: int
    trials: tuple[ForecastTrial, ...]
    summary: dict

    def crossing_years(self) -> list[int | None]:
        return [t.crossing_year for t in self.trials]

    def to_dict(self) -> dict:
        return {
            "policy_id": self.policy_id,
            "train_n": self.train_n,
            "summary": self.summary,
            "trials": [
                {
                    "r": t.curve.r,
                    "p0": t.curve.p0,
                    "t0": t.curve.t0,
                    "threshold": t.threshold,
                    "crossing_year": "censored" if t.crossing_year is None else t.crossing_year,
                    "surpassed": t.surpassed,
                }
                for t in self.trials
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> ForecastEnsemble:
        trials = tuple(
            ForecastTrial(
                LogisticCurve(t["p0"], t["r"], t["t0"]),
                int(t["threshold"]),
                None if t["crossing_year"] == "censored" else int(t["crossing_year"]),
                bool(t.get("surpassed", False)),
            )
            for t in d["trials"]
        )
        return cls(d["policy_id"], int(d["train_n"]), trials, dict(d["summary"]))


def _forecast_trial(events, pool, config, horizon, trial):
    rng = trial_rng(config.seed, trial, "forecast")
    sample = np.sort(smooth_bootstrap(events, rng, config.noise_sd))
    series = sample_to_series(sample)
    curve = fit_curve(series, config)
    threshold = sample_threshold(pool, rng)
    if threshold <= sample.size:
        # the bootstrap sample itself already reached the threshold
        year = math.ceil(sample[threshold - 1])
        return ForecastTrial(curve, threshold, None if year > horizon else year, True)
    return ForecastTrial(curve, threshold, crossing_year(curve, threshold, series.t0, horizon))


def forecast(record: PolicyRecord, train_n: int, pool: ThresholdPool,
             config: FitConfig | None = None, workers: int = 1,
             reference_year: int | None = None) -> ForecastEnsemble:
    """Bootstrap ensemble forecast from the first ``train_n`` adoptions of ``record``.

    Trials beyond ``record.first_year + config.horizon_years`` are censored.
    """
    config = config or FitConfig()
    if train_n < 2:
        raise ValueError("train_n must be at least 2")
    if len(record.adoptions) < train_n:
        raise ValueError(
            f"policy {record.id!r} has {len(record.adoptions)} adoptions, fewer than train_n={train_n}"
        )
    events = np.array(record.years[:train_n], dtype=float)
    horizon = record.first_year + config.horizon_years
    trials = run_trials(_forecast_trial, (events, pool, config, horizon), config.trials, workers)
    return ForecastEnsemble(record.id, train_n, tuple(trials), summarize(trials, reference_year))
