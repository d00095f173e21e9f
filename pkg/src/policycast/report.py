"""Plot-ready tables from forecast ensembles: year histograms, CDFs and trajectory grids."""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .growth import ForecastEnsemble, eval_curve

PRECISION = 9


def _fmt(x: float) -> str:
    return f"{x:.{PRECISION}f}"


@dataclass(frozen=True)
class YearHistogram:
    bins: dict[int, float]  # year -> probability mass, ascending years
    censored_fraction: float
    trials: int = 0  # 0 when masses were not built from counts


@dataclass(frozen=True)
class CdfTable:
    rows: tuple[tuple[int, float], ...]
    median_year: int | None


@dataclass(frozen=True)
class TrajectoryGrid:
    years: tuple[int, ...]
    fraction_edges: np.ndarray  # fraction_bins + 1 edges on [0, 1]
    counts: np.ndarray  # (fraction_bins, len(years)) integer counts
    trials: int

    @property
    def density(self) -> np.ndarray:
        return self.counts / self.trials


def year_histogram(ensemble: ForecastEnsemble) -> YearHistogram:
    years = ensemble.crossing_years()
    n = len(years)
    if n == 0:
        raise ValueError("empty ensemble")
    observed = [y for y in years if y is not None]
    if not observed:
        raise ValueError("every trial is censored; no histogram to report")
    counts = Counter(observed)
    bins = {y: counts[y] / n for y in sorted(counts)}
    return YearHistogram(bins, (n - len(observed)) / n, n)


def cdf_table(histogram: YearHistogram) -> CdfTable:
    """Running mass in year order; the median is the first year reaching 0.5."""
    if not histogram.bins:
        raise ValueError("empty histogram")
    n = histogram.trials
    rows, median, cum = [], None, 0
    for year, mass in histogram.bins.items():
        # integer counts when the trial total is known keep the running sum exact
        cum += round(mass * n) if n else mass
        value = cum / n if n else cum
        rows.append((year, value))
        if median is None and value >= 0.5:
            median = year
    return CdfTable(tuple(rows), median)


def trajectory_grid(ensemble: ForecastEnsemble, years, fraction_bins: int = 50) -> TrajectoryGrid:
    """Count, per calendar year, the trial curves falling in each fraction bin."""
    years = tuple(int(y) for y in years)
    if not years:
        raise ValueError("empty year range")
    if fraction_bins < 1:
        raise ValueError("fraction_bins must be positive")
    if not ensemble.trials:
        raise ValueError("empty ensemble")
    yr = np.array(years, dtype=float)
    counts = np.zeros((fraction_bins, len(years)), dtype=np.int64)
    cols = np.arange(len(years))
    for tr in ensemble.trials:
        p = eval_curve(tr.curve, yr - tr.curve.t0)
        idx = np.minimum((np.asarray(p) * fraction_bins).astype(np.int64), fraction_bins - 1)
        counts[idx, cols] += 1
    edges = np.linspace(0.0, 1.0, fraction_bins + 1)
    return TrajectoryGrid(years, edges, counts, len(ensemble.trials))


def histogram_csv(h: YearHistogram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "mass"])
    for year, mass in h.bins.items():
        w.writerow([year, _fmt(mass)])
    return buf.getvalue()


def cdf_csv(c: CdfTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["year", "cumulative"])
    for year, cum in c.rows:
        w.writerow([year, _fmt(cum)])
    return buf.getvalue()


def grid_csv(g: TrajectoryGrid) -> str:
    """Rows are fraction bins (lower edge in the first column), columns are years."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fraction"] + list(g.years))
    dens = g.density
    for i in range(dens.shape[0]):
        w.writerow([_fmt(g.fraction_edges[i])] + [_fmt(v) for v in dens[i]])
    return buf.getvalue()


def parse_cdf_csv(text: str) -> CdfTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["year", "cumulative"]:
        raise ValueError("not a CDF table")
    rows = tuple((int(y), float(c)) for y, c in reader)
    median = next((y for y, c in rows if c >= 0.5), None)
    return CdfTable(rows, median)


def summary_dict(ensemble: ForecastEnsemble, grid_years=None, fraction_bins: int = 50) -> dict:
    """Histogram, CDF and grid as one structured document."""
    h = year_histogram(ensemble)
    c = cdf_table(h)
    out = {
        "histogram": {str(y): m for y, m in h.bins.items()},
        "censored_fraction": h.censored_fraction,
        "cdf": [[y, v] for y, v in c.rows],
        "median_year": c.median_year,
    }
    if grid_years is not None:
        g = trajectory_grid(ensemble, grid_years, fraction_bins)
        out["grid"] = {
            "years": list(g.years),
            "fraction_edges": [float(e) for e in g.fraction_edges],
            "density": g.density.tolist(),
        }
    return out
