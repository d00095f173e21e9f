"""Run the three analyses on a user-supplied policy corpus.

The original corpus is not bundled.  Point this script at a policies CSV in
the package's input format (and optionally a traits JSON) to reproduce the
classification, threshold regression and forecast results.

    python scripts/reproduce_published.py policies.csv --traits traits.json \\
        --forecast same_sex_marriage:10:2015 --forecast meth_precursor:5:2006
"""
import argparse
import json

import numpy as np

from policycast.corpus import load_corpus
from policycast.growth import FitConfig, ThresholdPool, forecast
from policycast.learn import (
    ModelSpec,
    build_dataset,
    cross_validate,
    majority_baseline,
)


def forecast_arg(text):
    policy, train_n, year = text.split(":")
    return policy, int(train_n), int(year)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("policies")
    ap.add_argument("--traits")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--lam", type=float, default=0.056)
    ap.add_argument("--forecast", type=forecast_arg, action="append", default=[],
                    metavar="POLICY:TRAIN_N:YEAR")
    ap.add_argument("--out", help="write all results to this JSON file")
    args = ap.parse_args()

    corpus = load_corpus(args.policies, args.traits, filter_top_down=True)
    common = dict(trials=args.trials, seed=args.seed, workers=args.workers)
    results = {"excluded": [pid for pid, _ in corpus.excluded]}

    national = build_dataset(corpus, "national")
    results["baseline"] = majority_baseline(national.targets)
    print(f"{len(national)} policies, majority baseline {results['baseline']:.3f}")
    for kind in ("logistic", "forest"):
        rep = cross_validate(ModelSpec(kind), national, **common)
        results[kind] = rep.to_dict()
        print(f"  {kind:8s} accuracy {rep.mean:.3f} [{rep.p05:.3f}, {rep.p95:.3f}]")

    thresh = build_dataset(corpus, "threshold")
    for spec in (ModelSpec("lasso", {"lam": args.lam}), ModelSpec("forest_regressor", {"max_depth": 1})):
        rep = cross_validate(spec, thresh, **common)
        results[spec.kind] = rep.to_dict()
        print(f"  {spec.kind:16s} R2 {rep.mean:.3f}, share <= 0: {np.mean(rep.scores <= 0):.3f}")

    for policy, train_n, year in args.forecast:
        pool = ThresholdPool.from_corpus(corpus, exclude=policy)
        ens = forecast(corpus.get(policy), train_n, pool,
                       FitConfig(trials=args.trials, seed=args.seed), args.workers, year)
        s = ens.summary
        results[f"forecast:{policy}:{train_n}"] = s
        print(f"  {policy} train_n={train_n}: modal {s['modal_year']} ({s['modal_density']:.3f}), "
              f"{year}±2 {s['density_within_2y']:.3f}, {year}+10 or later {s['density_10y_or_later']:.3f}")

    if args.out:
        with open(args.out, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
