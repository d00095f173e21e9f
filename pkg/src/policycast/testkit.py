"""Synthetic policies with known ground truth, for checking the pipeline end to end."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import (
    CATEGORIES,
    MAX_YEAR,
    N_STATES,
    STATES,
    Corpus,
    PolicyRecord,
    StateTraitTables,
    default_traits,
    make_record,
)
from .growth import LogisticCurve, Series, crossing_time, eval_curve

STATE_ORDER = tuple(sorted(STATES))
# the final state would need P = K, which the curve never reaches
LAST_FRACTION_COUNT = N_STATES - 0.5


@dataclass(frozen=True)
class SynthSpec:
    r_true: float
    p0_true: float = 1 / N_STATES
    first_year: int = 1990
    threshold_true: int | None = None
    pulse: tuple[int, int] | None = None  # (year, number of simultaneous adoptions)
    signal_strength: float = 1.0
    noise_sd: float = 0.0
    category: str = "other"
    states: tuple[str, ...] = STATE_ORDER
    policy_id: str = "synth"

    def __post_init__(self):
        if not self.r_true > 0:
            raise ValueError("r_true must be positive")
        if not 0 < self.p0_true < 1:
            raise ValueError("p0_true must lie in (0, 1)")
        if self.threshold_true is not None and not 1 <= self.threshold_true < N_STATES:
            raise ValueError(f"threshold_true must lie in [1, {N_STATES})")
        if not 0.5 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must lie in [0.5, 1]")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        if sorted(self.states) != list(STATE_ORDER):
            raise ValueError("states must be an ordering of the 50 states")
        if self.pulse is not None and not 1 <= self.pulse[1] <= N_STATES:
            raise ValueError("pulse count must lie in [1, 50]")

    @property
    def curve(self) -> LogisticCurve:
        return LogisticCurve(self.p0_true, self.r_true, float(self.first_year))


def adoption_years(spec: SynthSpec, rng=None) -> list[int]:
    """Year of the k-th adoption: the first calendar year in which the curve reaches k/50."""
    curve = spec.curve
    years = []
    for k in range(1, N_STATES + 1):
        t = max(crossing_time(curve, min(k, LAST_FRACTION_COUNT)), 0.0)
        if spec.noise_sd and rng is not None:
            t = max(t + rng.normal(0.0, spec.noise_sd), 0.0)
        years.append(spec.first_year + math.ceil(t))
    years.sort()
    if spec.pulse is not None:
        pulse_year, count = spec.pulse
        later = [i for i, y in enumerate(years) if y >= pulse_year]
        if len(later) < count:
            raise ValueError(f"only {len(later)} adoptions fall on or after {pulse_year}")
        for i in later[:count]:
            years[i] = pulse_year
    return years


def true_crossing_year(spec: SynthSpec) -> int:
    """Calendar year in which the generating curve reaches ``threshold_true``."""
    if spec.threshold_true is None:
        raise ValueError("spec has no threshold")
    t = max(crossing_time(spec.curve, spec.threshold_true), 0.0)
    return spec.first_year + math.ceil(t)


def curve_series(curve: LogisticCurve, n_points: int = 30, upper: float = 0.95) -> Series:
    """Noiseless series: the curve sampled at ``n_points`` even steps until it reaches ``upper``."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if not curve.p0 < upper < 1:
        raise ValueError("upper must lie between P0 and 1")
    t_end = crossing_time(curve, upper * N_STATES)
    t = np.linspace(0.0, t_end, n_points)
    return Series(t, np.asarray(eval_curve(curve, t)), curve.t0)


def synth_policy(spec: SynthSpec, rng=None) -> PolicyRecord:
    """Deterministic policy record whose adoptions follow the SynthSpec growth curve.

    National action (if any) lands the year after the ``threshold_true``-th
    adoption; later states whose curve year would precede it adopt in the
    national-action year instead, so exactly ``threshold_true`` states adopt
    strictly before it.  Adoptions past the last admissible year are dropped.
    """
    years = adoption_years(spec, rng)
    national = None
    if spec.threshold_true is not None:
        national = years[spec.threshold_true - 1] + 1
        years = [max(y, national) if i >= spec.threshold_true else y for i, y in enumerate(years)]
        if national > MAX_YEAR:
            raise ValueError("national action would fall after the last admissible year")
    pairs = [(s, y) for s, y in zip(spec.states, years) if y <= MAX_YEAR]
    return make_record(spec.policy_id, spec.policy_id, spec.category, pairs, national)


@dataclass(frozen=True)
class SynthDistribution:
    """How ``synth_corpus`` draws each policy."""

    r_range: tuple[float, float] = (0.08, 1.0)  # log-uniform; slow enough ends stay before 2100
    p0: float = 1 / N_STATES
    first_year_range: tuple[int, int] = (1850, 2000)
    signal_strength: float = 0.9
    planted_category: str = "health"

    def __post_init__(self):
        if not 0.5 <= self.signal_strength <= 1.0:
            raise ValueError("signal_strength must lie in [0.5, 1]")
        if self.planted_category not in CATEGORIES:
            raise ValueError(f"unknown category {self.planted_category!r}")


@dataclass(frozen=True)
class SynthTruth:
    labels: np.ndarray
    thresholds: tuple[int | None, ...]
    r_true: np.ndarray
    planted: np.ndarray  # planted feature value per policy
    planted_feature: str
    bayes_rate: float


def synth_corpus(n: int, dist: SynthDistribution | None = None, seed: int = 0,
                 traits: StateTraitTables | None = None) -> tuple[Corpus, SynthTruth]:
    """Corpus whose national-action label is driven by one planted category flag.

    Half the policies carry the planted category.  The label copies the flag
    with probability ``signal_strength`` and is flipped otherwise, so the
    Bayes-optimal accuracy is ``max(s, 1 - s)``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    dist = dist or SynthDistribution()
    traits = traits or default_traits()
    rng = np.random.default_rng(seed)
    others = [c for c in CATEGORIES if c != dist.planted_category]
    lo, hi = np.log(dist.r_range[0]), np.log(dist.r_range[1])
    records, labels, thresholds, rs, planted = [], [], [], [], []
    for i in range(n):
        flag = int(rng.random() < 0.5)
        label = flag if rng.random() < dist.signal_strength else 1 - flag
        category = dist.planted_category if flag else others[int(rng.integers(len(others)))]
        r = float(np.exp(rng.uniform(lo, hi)))
        first = int(rng.integers(dist.first_year_range[0], dist.first_year_range[1] + 1))
        states = tuple(STATE_ORDER[j] for j in rng.permutation(N_STATES))
        th = int(rng.integers(1, N_STATES)) if label else None
        spec = SynthSpec(r, dist.p0, first, th, category=category, states=states,
                         policy_id=f"synth_{i:04d}")
        records.append(synth_policy(spec))
        labels.append(label)
        thresholds.append(th)
        rs.append(r)
        planted.append(flag)
    truth = SynthTruth(
        np.array(labels), tuple(thresholds), np.array(rs), np.array(planted),
        f"category={dist.planted_category}",
        max(dist.signal_strength, 1 - dist.signal_strength),
    )
    return Corpus(tuple(records), traits), truth
