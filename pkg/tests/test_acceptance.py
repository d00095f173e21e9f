"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""
import math
import os
import time

import mpmath
import numpy as np
import pytest

from policycast.cli import main
from policycast.corpus import load_corpus
from policycast.growth import (
    FitConfig,
    LogisticCurve,
    ThresholdPool,
    crossing_time,
    eval_curve,
    fit_curve,
    forecast,
)
from policycast.learn import (
    Dataset,
    ModelSpec,
    accuracy,
    build_dataset,
    cross_validate,
    majority_baseline,
    r_squared,
    significance_threshold,
)
from policycast.testkit import (
    SynthDistribution,
    SynthSpec,
    curve_series,
    synth_corpus,
    synth_policy,
    true_crossing_year,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, started):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\nACCEPTANCE {number}: {status} {detail} [{time.perf_counter() - started:.1f}s]")
        assert ok, detail

    return emit


def test_criterion_1_formula_exactness(report):
    t0 = time.perf_counter()
    y = np.array([1.0, 2.0, 3.0])
    values = (r_squared(y, y), r_squared(y, np.full(3, 2.0)), r_squared(y, y[::-1]))
    acc = accuracy(np.array([0] * 89 + [1] * 81), np.zeros(170, dtype=int))
    ok = (values[0] == 1.0 and values[1] == 0.0 and abs(values[2] + 3.0) <= 1e-12
          and acc == 89 / 170)
    report(1, ok, f"R2={values} accuracy={acc:.4f}", t0)


def test_criterion_2_curve_evaluation(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    monotone = True
    for _ in range(1000):
        p0 = float(np.exp(rng.uniform(np.log(1e-4), 0.0)))
        r = float(np.exp(rng.uniform(np.log(1e-3), np.log(5.0))))
        v = eval_curve(LogisticCurve(p0, r), np.linspace(0, 200, 100))
        monotone &= bool((np.diff(v) >= 0).all())
        worst = max(worst, abs(v[0] - p0),
                    float(np.max(np.abs(eval_curve(LogisticCurve(1.0, r), np.linspace(0, 200, 20)) - 1))))
    mpmath.mp.dps = 50
    exact = float(mpmath.mpf("0.02") / (mpmath.mpf("0.02") + mpmath.mpf("0.98") * mpmath.e ** -5))
    err = abs(eval_curve(LogisticCurve(0.02, 0.5), 10.0) - exact)
    report(2, monotone and worst <= 1e-9 and err <= 1e-9,
           f"monotone={monotone} identity_err={worst:.1e} oracle_err={err:.1e}", t0)


def test_criterion_3_inversion_round_trip(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst, worst_bisect = 0.0, 0.0
    for _ in range(1000):
        curve = LogisticCurve(float(np.exp(rng.uniform(np.log(1e-3), np.log(0.5)))),
                              float(np.exp(rng.uniform(np.log(0.01), np.log(3.0)))))
        th = int(rng.integers(1, 50))
        t = crossing_time(curve, th)
        worst = max(worst, abs(eval_curve(curve, t) - th / 50))
        if t > 0:
            lo, hi = 0.0, 1e4
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if eval_curve(curve, mid) < th / 50 else (lo, mid)
            worst_bisect = max(worst_bisect, abs(t - lo) / max(1.0, t))
    report(3, worst <= 1e-9 and worst_bisect <= 1e-9,
           f"max |P(t*) - th/50|={worst:.1e} max bisection gap={worst_bisect:.1e}", t0)


def textbook_grid_sse(t, y, r_grid, p0_grid):
    # the unrearranged form K P0 e^{rt} / (K + P0 (e^{rt} - 1)), evaluated independently
    e = np.exp(r_grid[:, None, None] * t[None, None, :])
    p0 = p0_grid[None, :, None]
    pred = p0 * e / (1.0 + p0 * (e - 1.0))
    return ((pred - y) ** 2).sum(axis=2)


def test_criterion_4_fit_recovery(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    cfg = FitConfig()
    errors, argmin_ok = [], True
    for _ in range(50):
        r = float(np.exp(rng.uniform(np.log(0.05), np.log(2.0))))
        p0 = float(np.exp(rng.uniform(np.log(0.005), np.log(0.1))))
        s = curve_series(LogisticCurve(p0, r))
        fit = fit_curve(s, cfg)
        errors.append(abs(fit.r - r) / r)
        table = textbook_grid_sse(s.t, s.y, cfg.r_grid, cfg.p0_grid)
        i, j = np.unravel_index(np.argmin(table), table.shape)
        argmin_ok &= (fit.r, fit.p0) == (cfg.r_grid[i], cfg.p0_grid[j])
    worst = max(errors)
    report(4, worst <= 0.05 and argmin_ok,
           f"max relative r error={worst:.4f} exhaustive argmin agrees={argmin_ok}", t0)


@pytest.mark.slow
def test_criterion_5_forecast_oracle(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    hits, noncensored, errors = 0, [], []
    for c in range(20):
        r = float(np.exp(rng.uniform(np.log(0.05), np.log(0.5))))
        first = int(rng.integers(1850, 1951))
        th = int(rng.integers(11, 41))
        spec = SynthSpec(r, 1 / 50, first, th)
        ens = forecast(synth_policy(spec), 10, ThresholdPool((th,)), FitConfig(trials=1000, seed=c))
        err = ens.summary["modal_year"] - true_crossing_year(spec)
        errors.append(err)
        hits += abs(err) <= 1
        noncensored.append(1 - ens.summary["censored_fraction"])
    ok = hits / 20 >= 0.6 and min(noncensored) >= 0.95
    report(5, ok, f"modal within 1y in {hits}/20 configs (errors {errors}); "
                  f"min non-censored share={min(noncensored):.3f}", t0)


def _shuffled_original_scale():
    corpus, _ = synth_corpus(170, SynthDistribution(signal_strength=0.9), seed=0)
    data = build_dataset(corpus)
    y = np.random.default_rng(0).permutation(np.array([1] * 81 + [0] * 89))
    return Dataset(data.features, y, data.feature_names, data.ids)


@pytest.mark.slow
def test_criterion_6_no_signal_and_planted(report):
    t0 = time.perf_counter()
    shuffled = _shuffled_original_scale()
    base = majority_baseline(shuffled.targets)
    # the corpus size for the planted half is unstated; 40 covariates need more than 170 rows
    planted_corpus, truth = synth_corpus(500, SynthDistribution(signal_strength=0.9), seed=1)
    planted = build_dataset(planted_corpus)
    parts, ok = [], True
    for kind in ("logistic", "forest"):
        noise = cross_validate(ModelSpec(kind), shuffled, trials=100, seed=6).mean
        signal = cross_validate(ModelSpec(kind), planted, trials=20, seed=6).mean
        ok &= abs(noise - base) <= 0.05 and abs(signal - truth.bayes_rate) <= 0.05
        parts.append(f"{kind}: shuffled {noise:.3f} vs baseline {base:.3f}, "
                     f"planted {signal:.3f} vs Bayes {truth.bayes_rate:.3f}")
    report(6, ok, "; ".join(parts), t0)


def test_criterion_7_significance_constant(report):
    t0 = time.perf_counter()
    value = significance_threshold(40, 5)
    report(7, round(value, 3) == 0.132, f"threshold={value:.6f}", t0)


def test_criterion_8_determinism(report, tmp_path):
    t0 = time.perf_counter()
    synth = tmp_path / "synth"
    assert main(["synth", "--signal", "0.9", "--n", "170", "--seed", "8", "--out", str(synth)]) == 0
    policies = str(synth / "policies.csv")
    commands = {
        "classify": ["classify", policies, "--trials", "20", "--format", "csv"],
        "forecast": ["forecast", policies, "--policy", "synth_0003", "--train-n", "10",
                     "--format", "csv"],
    }
    same = {}
    for name, argv in commands.items():
        runs = []
        for i, workers in enumerate(("1", "1", "4")):
            out = tmp_path / f"{name}{i}"
            assert main(argv + ["--seed", "8", "--workers", workers, "--out", str(out)]) == 0
            runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        same[name] = runs[0] == runs[1] == runs[2]
    report(8, all(same.values()), f"byte-identical: {same}", t0)


ORIGINAL_POLICIES = os.environ.get("POLICYCAST_ORIGINAL_POLICIES")


@pytest.mark.skipif(not ORIGINAL_POLICIES, reason="set POLICYCAST_ORIGINAL_POLICIES to the original corpus")
def test_criterion_9_published_results(report):
    t0 = time.perf_counter()
    corpus = load_corpus(ORIGINAL_POLICIES, os.environ.get("POLICYCAST_ORIGINAL_TRAITS"),
                         filter_top_down=True)
    ssm = os.environ.get("POLICYCAST_SSM_ID", "same_sex_marriage")
    meth = os.environ.get("POLICYCAST_METH_ID", "meth_precursor")
    national = build_dataset(corpus, "national")
    logit = cross_validate(ModelSpec("logistic"), national, trials=1000).mean
    forest = cross_validate(ModelSpec("forest"), national, trials=1000).mean
    lasso = cross_validate(ModelSpec("lasso", {"lam": 0.056}), build_dataset(corpus, "threshold"),
                           trials=1000)
    share = float(np.mean(lasso.scores <= 0))
    pool_ssm = ThresholdPool.from_corpus(corpus, exclude=ssm)
    s1 = forecast(corpus.get(ssm), 10, pool_ssm, reference_year=2015).summary
    s2 = forecast(corpus.get(meth), 5, ThresholdPool.from_corpus(corpus, exclude=meth),
                  reference_year=2006).summary
    checks = {
        "logistic": abs(logit - 0.573) <= 0.02,
        "forest": abs(forest - 0.569) <= 0.02,
        "lasso_r2": share >= 0.95,
        "ssm_mode": s1["modal_year"] == 2015,
        "ssm_window": 0.35 <= s1["density_within_2y"] <= 0.52,
        "meth_window": 0.30 <= s2["density_within_2y"] <= 0.48,
    }
    detail = (f"logistic={logit:.3f} forest={forest:.3f} share R2<=0={share:.3f} "
              f"ssm mode={s1['modal_year']} within2y={s1['density_within_2y']:.3f} "
              f"meth within2y={s2['density_within_2y']:.3f} checks={checks}")
    report(9, all(checks.values()), detail, t0)
