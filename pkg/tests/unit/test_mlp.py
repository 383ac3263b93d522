import os
import tempfile

import numpy as np
import pytest

from hwpd.classification import MLPClassifier, load_model
from .conftest import blobs


@pytest.mark.parametrize("hidden", [(3,), (4, 2)])
def test_gradients_match_finite_differences(hidden, rng):
    model = MLPClassifier(hidden=hidden)
    model.init_weights(4, rng)
    rows = rng.normal(size=(6, 4))
    labels = np.array([0, 1, 1, 0, 1, 0])
    _, grad_w, grad_b = model.loss_and_gradients(rows, labels)

    eps = 1e-6
    for layer in range(len(model.weights_)):
        for params, grads in ((model.weights_[layer], grad_w[layer]), (model.biases_[layer], grad_b[layer])):
            flat, flat_grad = params.reshape(-1), grads.reshape(-1)
            for i in range(min(len(flat), 5)):
                saved = flat[i]
                flat[i] = saved + eps
                up = model.loss_and_gradients(rows, labels)[0]
                flat[i] = saved - eps
                down = model.loss_and_gradients(rows, labels)[0]
                flat[i] = saved
                assert flat_grad[i] == pytest.approx((up - down) / (2 * eps), rel=1e-4, abs=1e-8)


def test_separable_blobs():
    rows, labels = blobs(20, distance=4.0, std=0.5)
    model = MLPClassifier(hidden=(5,), seed=1).fit(rows, labels)

    assert np.mean(model.predict(rows) == labels) >= 0.95
    scores = model.decision_function(rows)
    assert np.all((scores > 0) & (scores < 1))


def test_seed_determines_training():
    rows, labels = blobs(10)
    first = MLPClassifier(hidden=(4,), epochs=20, seed=5).fit(rows, labels)
    second = MLPClassifier(hidden=(4,), epochs=20, seed=5).fit(rows, labels)
    other = MLPClassifier(hidden=(4,), epochs=20, seed=6).fit(rows, labels)

    for a, b in zip(first.weights_, second.weights_):
        np.testing.assert_array_equal(a, b)
    assert not np.array_equal(first.weights_[0], other.weights_[0])


def test_layer_shapes():
    rows, labels = blobs(5, n_features=3)
    model = MLPClassifier(hidden=(6, 4), epochs=2).fit(rows, labels)
    assert [w.shape for w in model.weights_] == [(3, 6), (6, 4), (4, 1)]
    assert model.meta_params() == {"hidden": [6, 4]}


def test_save_load():
    rows, labels = blobs(8)
    model = MLPClassifier(hidden=(3,), epochs=10, seed=2).fit(rows, labels)
    with tempfile.TemporaryDirectory(prefix="hwpd_model_") as tmp:
        path = os.path.join(tmp, "model.json")
        model.save(path)
        loaded, _ = load_model(path)

    assert isinstance(loaded, MLPClassifier)
    assert loaded.layout == (3,)
    np.testing.assert_allclose(loaded.decision_function(rows), model.decision_function(rows), rtol=1e-12)
