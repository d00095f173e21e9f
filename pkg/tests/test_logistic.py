import numpy as np
import pytest

from policycast.learn import (
    LogisticModel,
    SingleClassError,
    accuracy,
    build_dataset,
    predict,
    train_logistic,
)
from policycast.testkit import SynthDistribution, synth_corpus


def test_separable_single_feature():
    X = np.array([[0], [0], [0], [1], [1], [1]], dtype=float)
    y = np.array([0, 0, 0, 1, 1, 1])
    model = train_logistic(X, y)
    assert accuracy(y, model.predict(X)) == 1.0
    assert np.all(np.isfinite(model.weights))


def test_identical_rows_give_half():
    X = np.ones((10, 3))
    y = np.array([0, 1] * 5)
    model = train_logistic(X, y)
    assert model.converged
    for x in ([0, 0, 0], [1, 1, 1], [1, 0, 1]):
        assert predict(model, x) == pytest.approx(0.5, abs=1e-6)


def test_gradient_below_tolerance_at_convergence():
    rng = np.random.default_rng(1)
    X = (rng.random((200, 5)) < 0.5).astype(float)
    y = (rng.random(200) < 1 / (1 + np.exp(-(X @ [1, -1, 0.5, 0, 0] - 0.2)))).astype(int)
    model = train_logistic(X, y)
    assert model.converged
    A = np.hstack([np.ones((200, 1)), X])
    p = model.predict_proba(X)
    assert np.linalg.norm(A.T @ (y - p)) <= model.tolerance


def test_single_class_points_to_baseline():
    with pytest.raises(SingleClassError, match="majority"):
        train_logistic(np.zeros((4, 2)), np.ones(4))


def test_zero_model_predicts_half():
    model = LogisticModel(np.zeros(40), 0.0, 1e-6, 10, 0, True)
    assert predict(model, np.ones(40)) == 0.5
    with pytest.raises(ValueError):
        predict(model, np.ones(39))


def test_planted_signal_held_out():
    corpus, truth = synth_corpus(2000, SynthDistribution(signal_strength=0.9), seed=5)
    data = build_dataset(corpus)
    X, y = data.features, data.targets
    model = train_logistic(X[:1000], y[:1000])
    assert accuracy(y[1000:], model.predict(X[1000:])) > 0.85
