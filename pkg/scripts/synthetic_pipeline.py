"""End-to-end run on synthetic data with known answers.

Builds a labelled corpus with a planted category signal, scores both
classifiers against the Bayes rate, runs the threshold regressions on
signal-free thresholds, and checks forecasts against known crossing years.

    python scripts/synthetic_pipeline.py --trials 50
"""
import argparse

import numpy as np

from policycast.growth import FitConfig, ThresholdPool, forecast
from policycast.learn import (
    ModelSpec,
    build_dataset,
    cross_validate,
    majority_baseline,
)
from policycast.testkit import SynthDistribution, SynthSpec, synth_corpus, synth_policy, true_crossing_year


def classification(args):
    corpus, truth = synth_corpus(args.n, SynthDistribution(signal_strength=args.signal), seed=args.seed)
    data = build_dataset(corpus, "national")
    print(f"classification: n={len(data)} baseline={majority_baseline(data.targets):.3f} "
          f"bayes={truth.bayes_rate:.3f}")
    for kind in ("logistic", "forest"):
        rep = cross_validate(ModelSpec(kind), data, trials=args.trials, seed=args.seed,
                             workers=args.workers)
        line = f"  {kind:8s} mean={rep.mean:.3f} [p05 {rep.p05:.3f}, p95 {rep.p95:.3f}]"
        if rep.importances is not None:
            freq, thresh = rep.top_k(5)
            top = [data.feature_names[i] for i in np.argsort(-freq, kind="stable")[:3]]
            line += f" top5 leaders={top} (chance {thresh:.3f})"
        print(line)
    return corpus


def thresholds(corpus, args):
    # synthetic thresholds are drawn independently of every covariate
    data = build_dataset(corpus, "threshold")
    print(f"thresholds: n={len(data)} (no signal by construction)")
    for spec in (ModelSpec("lasso", {"lam": 0.056}), ModelSpec("forest_regressor", {"max_depth": 1})):
        rep = cross_validate(spec, data, trials=args.trials, seed=args.seed, workers=args.workers)
        print(f"  {spec.kind:16s} mean R2={rep.mean:.3f} share<=0={np.mean(rep.scores <= 0):.3f}")


def forecasts(args):
    rng = np.random.default_rng(args.seed)
    print("forecasts: train_n=10, pool fixed to the true threshold")
    for c in range(args.configs):
        r = float(np.exp(rng.uniform(np.log(0.05), np.log(0.5))))
        spec = SynthSpec(r, 1 / 50, int(rng.integers(1850, 1951)), int(rng.integers(11, 41)))
        ens = forecast(synth_policy(spec), 10, ThresholdPool((spec.threshold_true,)),
                       FitConfig(trials=args.forecast_trials, seed=c), workers=args.workers)
        s = ens.summary
        print(f"  r={r:.3f} threshold={spec.threshold_true:2d} true={true_crossing_year(spec)} "
              f"modal={s['modal_year']} density={s['modal_density']:.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=170)
    ap.add_argument("--signal", type=float, default=0.9)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--forecast-trials", type=int, default=1000)
    ap.add_argument("--configs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    corpus = classification(args)
    thresholds(corpus, args)
    forecasts(args)


if __name__ == "__main__":
    main()
