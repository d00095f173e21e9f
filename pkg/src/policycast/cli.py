"""Command-line entry point: ``policycast {validate,classify,threshold,forecast,synth}``.

Exit codes: 0 success, 1 model/runtime error, 2 input/validation error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import CorpusError, format_policies, load_corpus
from .growth import FitConfig, ThresholdPool, forecast
from .learn import (
    ModelSpec,
    build_dataset,
    cross_validate,
    select_lambda,
    select_max_depth,
)
from .learn.evaluate import lambda_grid
from .report import (
    cdf_csv,
    cdf_table,
    grid_csv,
    histogram_csv,
    summary_dict,
    trajectory_grid,
    year_histogram,
)
from .testkit import SynthDistribution, SynthSpec, synth_corpus, synth_policy

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT = 0, 1, 2

# flags that never change results and are left out of run metadata
_NON_RESULT_FLAGS = ("workers", "out")


class InputError(Exception):
    pass


def _json(obj) -> str:
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not serialisable: {type(o).__name__}")

    return json.dumps(obj, sort_keys=True, indent=2, default=default) + "\n"


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")


def _write_metadata(args, argv) -> None:
    config = {k: v for k, v in vars(args).items() if k not in _NON_RESULT_FLAGS + ("func",)}
    inputs = {}
    for key in ("policies", "traits"):
        path = getattr(args, key, None)
        if path:
            inputs[Path(path).name] = _digest(path)
    replay, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok in ("--out", "--workers"):
            skip = True
            continue
        if tok.startswith(("--out=", "--workers=")):
            continue
        replay.append(tok)
    meta = {"version": __version__, "seed": args.seed, "config": config, "inputs": inputs,
            "argv": replay}
    _write(Path(args.out), "run.json", _json(meta))


def _load(args):
    try:
        return load_corpus(args.policies, args.traits, filter_top_down=args.filter)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {exc.filename}") from exc


# -- subcommands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    corpus = _load(args)
    for p in corpus.policies:
        print(f"ok\t{p.id}\t{len(p.adoptions)} adoptions")
    for pid, reason in corpus.excluded:
        print(f"excluded\t{pid}\t{reason}")
    n_ex = len(corpus.excluded)
    tail = f"{n_ex} excluded" + (" (top-down)" if n_ex else "")
    print(f"{len(corpus.policies)} policies loaded, {tail}")
    return EXIT_OK


def _forest_params(args) -> dict:
    return {"n_trees": args.n_trees, "max_depth": args.max_depth,
            "features_per_split": args.features_per_split}


def _top_features(report, k=5) -> list[str]:
    freq, _ = report.top_k(k)
    order = np.argsort(-freq, kind="stable")[:k]
    return [report.feature_names[i] for i in sorted(order)]


def cmd_classify(args) -> int:
    corpus = _load(args)
    data = build_dataset(corpus, "national")
    if len(data) < args.folds:
        raise InputError(f"{len(data)} policies is fewer than {args.folds} folds")
    if args.features not in ("all", "top5"):
        data = data.select([n.strip() for n in args.features.split(",")])
    out = Path(args.out)
    common = dict(folds=args.folds, trials=args.trials, seed=args.seed, workers=args.workers)
    logit = cross_validate(ModelSpec("logistic"), data, **common)
    forest = cross_validate(ModelSpec("forest", _forest_params(args)), data, **common)
    _write(out, "classify_logistic.json", _json(logit.to_dict()))
    _write(out, "classify_forest.json", _json(forest.to_dict()))
    reports = {"logistic": logit, "forest": forest}
    if args.features == "top5":
        names = _top_features(forest)
        sub = cross_validate(ModelSpec("forest", _forest_params(args)), data.select(names), **common)
        _write(out, "classify_forest_top5.json", _json(sub.to_dict()))
        reports["forest_top5"] = sub
    if args.format == "csv":
        _write(out, "classify_scores.csv", _score_table(reports))
        _write(out, "classify_importance.csv", _importance_table(forest))
    for name, rep in reports.items():
        print(f"{name}: mean={rep.mean:.3f} p05={rep.p05:.3f} p95={rep.p95:.3f}")
    return EXIT_OK


def _score_table(reports: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial"] + list(reports))
    cols = [r.scores for r in reports.values()]
    for t in range(len(cols[0])):
        w.writerow([t] + [f"{c[t]:.9f}" for c in cols])
    return buf.getvalue()


def _importance_table(report) -> str:
    freq, _ = report.top_k(5)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["feature", "importance", "top5_frequency"])
    for name, imp, f in zip(report.feature_names, report.per_feature_importance, freq):
        w.writerow([name, f"{imp:.9f}", f"{f:.9f}"])
    return buf.getvalue()


def cmd_threshold(args) -> int:
    corpus = _load(args)
    data = build_dataset(corpus, "threshold")
    if len(data) < args.folds:
        raise InputError(f"{len(data)} national-action policies is fewer than {args.folds} folds")
    if np.all(data.targets == data.targets[0]):
        raise InputError("thresholds are constant (SS_tot = 0); R^2 is undefined")
    out = Path(args.out)
    common = dict(folds=args.folds, seed=args.seed, workers=args.workers)
    selection = {}
    lam = args.lam
    if lam is None:
        lam, means = select_lambda(data, lambda_grid(args.lambda_grid), trials=args.select_trials,
                                   **common)
        selection["lambda_grid_mean_r2"] = dict(zip(map(float, lambda_grid(args.lambda_grid)),
                                                    map(float, means)))
    depth = args.max_depth
    if args.auto_depth:
        depth, means = select_max_depth(data, trials=args.select_trials, n_trees=args.n_trees, **common)
        selection["depth_mean_r2"] = {str(d): float(m) for d, m in
                                      zip((1, 2, 3, 5, None), means)}
    selection.update({"lambda": lam, "max_depth": depth})
    lasso = cross_validate(ModelSpec("lasso", {"lam": lam}), data, trials=args.trials, **common)
    params = _forest_params(args) | {"max_depth": depth}
    forest = cross_validate(ModelSpec("forest_regressor", params), data, trials=args.trials, **common)
    _write(out, "threshold_lasso.json", _json(lasso.to_dict()))
    _write(out, "threshold_forest.json", _json(forest.to_dict()))
    _write(out, "threshold_selection.json", _json(selection))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy_id", "actual", "lasso_mean_prediction", "forest_mean_prediction"])
    lp, fp = lasso.predictions.mean(axis=0), forest.predictions.mean(axis=0)
    for pid, y, a, b in zip(data.ids, data.targets, lp, fp):
        w.writerow([pid, int(y), f"{a:.9f}", f"{b:.9f}"])
    _write(out, "threshold_predictions.csv", buf.getvalue())
    if args.format == "csv":
        _write(out, "threshold_scores.csv", _score_table({"lasso": lasso, "forest": forest}))
    for name, rep in (("lasso", lasso), ("forest", forest)):
        frac = float(np.mean(rep.scores <= 0))
        print(f"{name}: mean R2={rep.mean:.3f} p95={rep.p95:.3f} share<=0={frac:.3f}")
    return EXIT_OK


def cmd_forecast(args) -> int:
    corpus = _load(args)
    try:
        record = corpus.get(args.policy)
    except KeyError:
        raise InputError(f"unknown policy id {args.policy!r}") from None
    if args.train_n > len(record.adoptions):
        raise InputError(f"policy {record.id!r} has only {len(record.adoptions)} adoptions "
                         f"(train_n={args.train_n})")
    pool = ThresholdPool.from_corpus(corpus, exclude=record.id if args.leave_one_out else None)
    config = FitConfig(trials=args.trials, noise_sd=args.noise_sd, seed=args.seed,
                       horizon_years=args.horizon)
    ens = forecast(record, args.train_n, pool, config, workers=args.workers,
                   reference_year=args.target_year)
    lo, hi = args.grid_years or (record.first_year, record.first_year + 60)
    years = range(lo, hi + 1)
    out = Path(args.out)
    _write(out, "forecast_ensemble.json", _json(ens.to_dict()))
    _write(out, "forecast_report.json", _json(summary_dict(ens, years, args.fraction_bins)))
    if args.format == "csv":
        h = year_histogram(ens)
        _write(out, "forecast_histogram.csv", histogram_csv(h))
        _write(out, "forecast_cdf.csv", cdf_csv(cdf_table(h)))
        _write(out, "forecast_grid.csv", grid_csv(trajectory_grid(ens, years, args.fraction_bins)))
    s = ens.summary
    print(f"{record.id} train_n={args.train_n}: modal {s['modal_year']} ({s['modal_density']:.3f}), "
          f"within 2y of {s['reference_year']}: {s['density_within_2y']:.3f}, "
          f"median {s['median_year_from_cdf']}, censored {s['censored_fraction']:.3f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out)
    if args.signal is not None:
        try:
            dist = SynthDistribution(signal_strength=args.signal)
        except ValueError as exc:
            raise InputError(f"invalid synthetic spec: {exc}") from exc
        corpus, truth = synth_corpus(args.n or 170, dist, seed=args.seed)
        records = corpus.policies
        _write(out, "truth.json", _json({
            "labels": truth.labels, "thresholds": list(truth.thresholds), "r_true": truth.r_true,
            "planted_feature": truth.planted_feature, "bayes_rate": truth.bayes_rate,
        }))
    else:
        rng = np.random.default_rng(args.seed)
        try:
            spec = SynthSpec(args.r, args.p0, args.first_year, args.threshold, pulse=args.pulse,
                             noise_sd=args.noise_sd, policy_id=args.policy_id)
            records = [synth_policy(spec, rng)]
        except ValueError as exc:
            raise InputError(f"invalid synthetic spec: {exc}") from exc
    _write(out, "policies.csv", format_policies(records))
    print(f"wrote {len(records)} synthetic policies to {out / 'policies.csv'}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def _pulse(text: str):
    try:
        year, count = text.split(":")
        return int(year), int(count)
    except ValueError:
        raise argparse.ArgumentTypeError("pulse must look like YEAR:COUNT") from None


def _span(text: str):
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("expected FIRST:LAST") from None


def _depth(text: str):
    return None if text in ("none", "unlimited") else int(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--trials", type=int, default=1000)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--out", default="out")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--filter", action="store_true", help="drop top-down policies instead of failing")
    g.add_argument("--leave-one-out", action="store_true",
                   help="forecast: remove the policy's own threshold from the pool")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("policies", help="policies CSV file")
    data.add_argument("--traits", help="traits JSON file (default: bundled tables)")

    forest = argparse.ArgumentParser(add_help=False)
    forest.add_argument("--n-trees", type=int, default=100)
    forest.add_argument("--max-depth", type=_depth, default=None)
    forest.add_argument("--features-per-split", type=int, default=None)
    forest.add_argument("--folds", type=int, default=4)

    parser = argparse.ArgumentParser(prog="policycast", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common, data], help="check a corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", parents=[common, data, forest],
                       help="predict national action (logistic regression and random forest)")
    p.add_argument("--features", default="all",
                   help="'all', 'top5' (also refit on the five most important) or comma-separated names")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("threshold", parents=[common, data, forest],
                       help="regress the national-action threshold (lasso and random forest)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="lasso penalty (default: chosen by CV over a log grid)")
    p.add_argument("--lambda-grid", type=int, default=25, help="number of grid points on [1e-4, 1]")
    p.add_argument("--auto-depth", action="store_true", help="choose forest depth by CV")
    p.add_argument("--select-trials", type=int, default=50)
    p.set_defaults(func=cmd_threshold, max_depth=1)

    p = sub.add_parser("forecast", parents=[common, data], help="forecast the year of national action")
    p.add_argument("--policy", required=True)
    p.add_argument("--train-n", type=int, required=True)
    p.add_argument("--noise-sd", type=float, default=1.0)
    p.add_argument("--horizon", type=int, default=200, help="censor crossings this many years out")
    p.add_argument("--target-year", type=int, default=None,
                   help="centre window statistics on this year (default: modal year)")
    p.add_argument("--grid-years", type=_span, default=None, metavar="FIRST:LAST")
    p.add_argument("--fraction-bins", type=int, default=50)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic policies file")
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--p0", type=float, default=0.02)
    p.add_argument("--first-year", type=int, default=1990)
    p.add_argument("--threshold", type=int, default=None)
    p.add_argument("--pulse", type=_pulse, default=None, metavar="YEAR:COUNT")
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--policy-id", default="synth")
    p.add_argument("--signal", type=float, default=None,
                   help="write a labelled corpus with this planted signal strength instead")
    p.add_argument("--n", type=int, default=None, help="corpus size with --signal (default 170)")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "folds", 2) < 2:
        print("error: --folds must be at least 2", file=sys.stderr)
        return EXIT_INPUT
    try:
        code = args.func(args)
    except (CorpusError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.command != "validate":
        _write_metadata(args, argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
