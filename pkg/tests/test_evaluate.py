import numpy as np
import pytest

from policycast.learn import (
    Dataset,
    ModelSpec,
    build_dataset,
    cross_validate,
    majority_baseline,
    select_lambda,
    significance_threshold,
    top_k_frequency,
)
from policycast.testkit import SynthDistribution, synth_corpus


def test_significance_threshold_value():
    thresh = significance_threshold(40, 5)
    assert thresh == pytest.approx(1 / 40 + 1 / 39 + 1 / 38 + 1 / 37 + 1 / 36, abs=1e-15)
    assert round(thresh, 3) == 0.132


def test_single_trial_frequencies_binary():
    freq, _ = top_k_frequency(np.arange(40.0)[None, :], 5)
    assert set(freq) == {0.0, 1.0}
    assert freq[35:].tolist() == [1.0] * 5


def test_uniform_rankings_match_chance():
    rng = np.random.default_rng(0)
    freq, _ = top_k_frequency(rng.random((10_000, 40)), 5)
    assert np.all(np.abs(freq - 5 / 40) <= 0.02)


def test_k_larger_than_d():
    with pytest.raises(ValueError):
        top_k_frequency(np.ones((3, 4)), 5)


def _noise_data(n=60, d=10, seed=0):
    rng = np.random.default_rng(seed)
    X = (rng.random((n, d)) < 0.4).astype(float)
    y = (rng.random(n) < 0.5).astype(int)
    return Dataset(X, y, tuple(f"f{i}" for i in range(d)))


def test_each_row_scored_once_per_trial():
    data = _noise_data()
    rep = cross_validate(ModelSpec("logistic"), data, trials=5, seed=3)
    assert rep.predictions.shape == (5, 60)
    for t in range(5):
        assert rep.scores[t] == np.mean(rep.predictions[t] == data.targets)


def test_trials_use_independent_partitions():
    data = _noise_data()
    rep = cross_validate(ModelSpec("logistic"), data, trials=10, seed=3)
    assert len({tuple(p) for p in rep.predictions}) > 1


def test_fold_count_exceeding_rows():
    with pytest.raises(ValueError):
        cross_validate(ModelSpec("logistic"), _noise_data(n=3), folds=4, trials=1)


@pytest.mark.parametrize("kind", ["logistic", "forest"])
def test_worker_count_does_not_change_results(kind):
    data = _noise_data()
    spec = ModelSpec(kind, {"n_trees": 5})
    a = cross_validate(spec, data, trials=6, seed=7, workers=1)
    b = cross_validate(spec, data, trials=6, seed=7, workers=3)
    np.testing.assert_array_equal(a.scores, b.scores)
    np.testing.assert_array_equal(a.predictions, b.predictions)
    if kind == "forest":
        np.testing.assert_array_equal(a.importances, b.importances)


def test_report_percentiles_and_keys():
    data = _noise_data()
    rep = cross_validate(ModelSpec("forest", {"n_trees": 5}), data, trials=20, seed=1)
    d = rep.to_dict()
    assert set(d) == {"trials", "mean", "p05", "p95", "per_feature_importance",
                      "top5_frequency", "significance_threshold"}
    assert d["p05"] <= d["mean"] <= d["p95"]
    assert all(0 <= v <= 1 for v in d["top5_frequency"].values())
    assert sum(d["per_feature_importance"].values()) == pytest.approx(1.0)


def test_label_shuffled_logistic_near_baseline():
    corpus, _ = synth_corpus(170, SynthDistribution(signal_strength=0.9), seed=1)
    data = build_dataset(corpus)
    y = np.random.default_rng(0).permutation(np.array([1] * 81 + [0] * 89))
    shuffled = Dataset(data.features, y, data.feature_names, data.ids)
    rep = cross_validate(ModelSpec("logistic"), shuffled, trials=100, seed=0)
    assert abs(rep.mean - majority_baseline(y)) <= 0.05


def test_planted_signal_logistic_near_bayes_rate():
    corpus, truth = synth_corpus(500, SynthDistribution(signal_strength=0.9), seed=2)
    rep = cross_validate(ModelSpec("logistic"), build_dataset(corpus), trials=10, seed=2)
    assert abs(rep.mean - truth.bayes_rate) <= 0.05


def test_select_lambda_prefers_signal_fitting_penalty():
    rng = np.random.default_rng(8)
    X = (rng.random((80, 6)) < 0.5).astype(float)
    y = X @ [5.0, -3.0, 0, 0, 0, 0] + 20 + rng.normal(scale=0.5, size=80)
    lam, means = select_lambda(Dataset(X, y, tuple("abcdef")), trials=5)
    assert lam < 0.5
    assert means.max() > 0.9
