import numpy as np
import pytest

from utils.errors import InvalidArgumentError
from trainNetworks.model import ModelParams, init_model, model_from_layers
from trainNetworks.main import (
    temp_softmax,
    kl_divergence,
    cross_entropy,
    mean_cross_entropy,
    forward,
    predict_proba,
    cross_entropy_gradient,
    grad_step,
)

def _naive_forward(model, batch):
    activation = [list(row) for row in batch]
    for index, (weight, bias) in enumerate(model.layers):
        out = []
        for row in activation:
            values = []
            for j in range(weight.shape[1]):
                total = bias[j]
                for i in range(weight.shape[0]):
                    total += row[i] * weight[i, j]
                if index < len(model.layers) - 1:
                    total = max(total, 0.0)
                values.append(total)
            out.append(values)
        activation = out
    return np.array(activation)

class TestTempSoftmax:
    def test_symmetric_logits(self):
        np.testing.assert_allclose(temp_softmax(np.array([0.0, 0.0]), 1.0), [0.5, 0.5], atol=1e-15)

    def test_log_two(self):
        np.testing.assert_allclose(temp_softmax(np.array([np.log(2.0), 0.0]), 1.0), [2 / 3, 1 / 3], atol=1e-12)

    def test_high_temperature_flattens(self):
        np.testing.assert_allclose(temp_softmax(np.array([1.0, 2.0, 3.0]), 1e4), [1 / 3] * 3, atol=1e-3)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(0)
        logits = rng.normal(scale=50, size=(200, 7))
        for temperature in (0.1, 1.0, 3.0, 100.0):
            np.testing.assert_allclose(temp_softmax(logits, temperature).sum(axis=1), 1.0, atol=1e-9)

    def test_temperature_shrinks_range(self):
        logits = np.array([0.3, -1.2, 2.5, 0.0])
        ranges = [np.ptp(temp_softmax(logits, t)) for t in (0.5, 1.0, 2.0, 5.0, 20.0)]
        assert all(a > b for a, b in zip(ranges[:-1], ranges[1:]))

    @pytest.mark.parametrize("temperature", [0.0, -1.0])
    def test_rejects_non_positive_temperature(self, temperature):
        with pytest.raises(InvalidArgumentError):
            temp_softmax(np.array([1.0, 2.0]), temperature)

    def test_rejects_non_finite_logits(self):
        with pytest.raises(InvalidArgumentError):
            temp_softmax(np.array([1.0, np.inf]), 1.0)

class TestKlDivergence:
    def test_identity(self):
        p = np.array([0.2, 0.3, 0.5])
        assert kl_divergence(p, p) == 0.0

    def test_one_hot_against_uniform(self):
        assert kl_divergence(np.array([1.0, 0.0]), np.array([0.5, 0.5])) == pytest.approx(np.log(2.0), abs=1e-12)

    def test_matches_elementwise_sum(self):
        rng = np.random.default_rng(1)
        p = rng.dirichlet(np.ones(10))
        q = rng.dirichlet(np.ones(10))
        expected = sum(p_l * (np.log(p_l) - np.log(q_l)) for p_l, q_l in zip(p, q))
        assert kl_divergence(p, q) == pytest.approx(expected, abs=1e-12)

    def test_non_negative(self):
        rng = np.random.default_rng(2)
        p = rng.dirichlet(np.ones(5), size=500)
        q = rng.dirichlet(np.ones(5), size=500)
        assert np.all(kl_divergence(p, q) >= 0)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            kl_divergence(np.array([0.5, 0.5]), np.array([0.2, 0.3, 0.5]))

class TestCrossEntropy:
    def test_perfect_prediction(self):
        assert cross_entropy(np.array([0.0, 1.0, 0.0]), 1) == 0.0

    def test_uniform_two_classes(self):
        assert cross_entropy(np.array([0.5, 0.5]), 0) == pytest.approx(np.log(2.0), abs=1e-15)

    def test_batch_mean_is_mean_of_samples(self):
        rng = np.random.default_rng(3)
        probs = rng.dirichlet(np.ones(4), size=30)
        labels = rng.integers(0, 4, size=30)
        per_sample = [cross_entropy(row, label) for row, label in zip(probs, labels)]
        assert mean_cross_entropy(probs, labels) == pytest.approx(np.mean(per_sample), abs=1e-12)

    def test_label_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            cross_entropy(np.array([0.5, 0.5]), 2)

class TestForward:
    def test_zero_model_gives_zero_logits(self):
        model = ModelParams(((3, 5), (5, 2)), np.zeros(3 * 5 + 5 + 5 * 2 + 2))
        np.testing.assert_array_equal(forward(model, np.ones((4, 3))), np.zeros((4, 2)))

    def test_single_linear_layer(self):
        model = model_from_layers([(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([0.5, -0.5]))])
        np.testing.assert_allclose(forward(model, np.array([[1.0, 1.0]])), [[4.5, 5.5]])

    def test_matches_naive_loops(self):
        rng = np.random.default_rng(4)
        model = init_model(5, 7, 3, seed=9)
        model = model.with_values(model.values + 0.1 * rng.standard_normal(model.values.size))
        batch = rng.standard_normal((6, 5))
        np.testing.assert_allclose(forward(model, batch), _naive_forward(model, batch), atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            forward(init_model(3, 4, 2, seed=0), np.ones((2, 5)))

class TestInitModel:
    def test_layout_and_bounds(self):
        model = init_model(20, 64, 10, seed=0)
        assert model.layer_shapes == ((20, 64), (64, 10))
        weight, bias = model.layers[0]
        assert np.all(np.abs(weight) <= np.sqrt(6.0 / (20 + 64)))
        np.testing.assert_array_equal(bias, 0.0)

    def test_seeded(self):
        np.testing.assert_array_equal(init_model(4, 3, 2, seed=5).values, init_model(4, 3, 2, seed=5).values)

    def test_values_are_read_only(self):
        with pytest.raises(ValueError):
            init_model(2, 2, 2, seed=0).values[0] = 1.0

class TestGradStep:
    def test_zero_learning_rate_is_identity(self):
        model = init_model(3, 4, 2, seed=1)
        updated = grad_step(model, np.ones((2, 3)), np.array([0, 1]), lr=0.0)
        np.testing.assert_array_equal(updated.values, model.values)

    def test_stationary_point_is_kept(self):
        model = model_from_layers([(np.zeros((2, 2)), np.zeros(2))])
        batch = np.array([[1.0, -2.0], [1.0, -2.0]])
        updated = grad_step(model, batch, np.array([0, 1]), lr=0.5)
        np.testing.assert_array_equal(updated.values, model.values)

    def test_matches_central_differences(self):
        rng = np.random.default_rng(5)
        for trial in range(20):
            model = init_model(2, 2, 2, seed=trial)
            model = model.with_values(model.values + 0.3 * rng.standard_normal(model.values.size))
            batch = rng.standard_normal((5, 2))
            labels = rng.integers(0, 2, size=5)
            temperature = [1.0, 2.0][trial % 2]

            _, analytic = cross_entropy_gradient(model, batch, labels, temperature)
            numeric = np.empty_like(analytic)
            h = 1e-5
            for k in range(model.values.size):
                step = np.zeros(model.values.size)
                step[k] = h
                plus, _ = cross_entropy_gradient(model.with_values(model.values + step), batch, labels, temperature)
                minus, _ = cross_entropy_gradient(model.with_values(model.values - step), batch, labels, temperature)
                numeric[k] = (plus - minus) / (2 * h)

            np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-8)

    def test_full_batch_gradient_is_mean_of_minibatch_gradients(self):
        rng = np.random.default_rng(6)
        model = init_model(3, 5, 4, seed=2)
        batch = rng.standard_normal((12, 3))
        labels = rng.integers(0, 4, size=12)

        _, full = cross_entropy_gradient(model, batch, labels)
        parts = [cross_entropy_gradient(model, batch[i: i + 4], labels[i: i + 4])[1] for i in range(0, 12, 4)]

        np.testing.assert_allclose(full, np.mean(parts, axis=0), atol=1e-10)

    def test_step_lowers_loss(self):
        rng = np.random.default_rng(7)
        model = init_model(3, 5, 2, seed=0)
        batch = rng.standard_normal((20, 3))
        labels = (batch[:, 0] > 0).astype(int)
        before, _ = cross_entropy_gradient(model, batch, labels)
        after, _ = cross_entropy_gradient(grad_step(model, batch, labels, lr=0.1), batch, labels)
        assert after < before

    def test_empty_batch(self):
        with pytest.raises(InvalidArgumentError):
            grad_step(init_model(3, 4, 2, seed=0), np.empty((0, 3)), np.array([], dtype=int), lr=0.1)

    def test_predict_proba_uses_temperature(self):
        model = init_model(3, 4, 2, seed=0)
        batch = np.ones((1, 3))
        np.testing.assert_allclose(predict_proba(model, batch, 2.0), temp_softmax(forward(model, batch), 2.0))
