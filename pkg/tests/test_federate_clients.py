import numpy as np
import pytest

from utils.errors import InvalidArgumentError
from generateData.dataset import Dataset, Shard
from trainNetworks.model import ModelParams, init_model
from trainNetworks.main import predict, cross_entropy_gradient
from federateClients.state import ClientState, RegionState
from federateClients.main import (
    local_train,
    fedavg,
    sample_clients,
    weight_divergence,
    probability_distance,
    class_distribution,
    gradient_dissimilarity,
)

def _client(client_id, dataset, model):
    indices = np.arange(dataset.size)
    return ClientState(client_id, Shard(indices, dataset), model)

class TestLocalTrain:
    def _separable(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(0, 2, size=200)
        features = np.where(labels[:, None] == 1, 2.0, -2.0) + 0.5 * rng.standard_normal((200, 2))
        return Dataset(features, labels, 2)

    def test_zero_epochs_returns_init(self):
        model = init_model(2, 4, 2, seed=0)
        client = _client(0, self._separable(), model)
        trained = local_train(client, model, epochs=0, lr=0.1, batch_size=16, seed=1)
        np.testing.assert_array_equal(trained.values, model.values)

    def test_learns_separable_shard(self):
        dataset = self._separable()
        model = init_model(2, 8, 2, seed=0)
        trained = local_train(_client(0, dataset, model), model, epochs=20, lr=0.1, batch_size=16, seed=1)
        assert np.mean(predict(trained, dataset.features) == dataset.labels) >= 0.95

    def test_deterministic(self):
        dataset = self._separable()
        model = init_model(2, 8, 2, seed=0)
        client = _client(0, dataset, model)
        first = local_train(client, model, epochs=3, lr=0.1, batch_size=16, seed=5)
        second = local_train(client, model, epochs=3, lr=0.1, batch_size=16, seed=5)
        assert first.values.tobytes() == second.values.tobytes()

    def test_empty_shard(self):
        empty = Dataset(np.empty((0, 2)), np.array([], dtype=int), 2)
        model = init_model(2, 4, 2, seed=0)
        with pytest.raises(InvalidArgumentError):
            local_train(ClientState(0, Shard(np.array([], dtype=int), empty), model), model, 1, 0.1, 8, seed=0)

class TestFedavg:
    def test_identical_models(self, small_models):
        model = small_models[0]
        np.testing.assert_array_equal(fedavg([model, model, model]).values, model.values)

    def test_two_scalar_models(self):
        a = ModelParams(((1, 1),), np.array([0.0, 0.0]))
        b = ModelParams(((1, 1),), np.array([2.0, 2.0]))
        np.testing.assert_array_equal(fedavg([a, b]).values, [1.0, 1.0])

    def test_matches_elementwise_mean(self):
        rng = np.random.default_rng(1)
        models = [init_model(4, 6, 3, seed=s).with_values(rng.standard_normal(4 * 6 + 6 + 6 * 3 + 3)) for s in range(5)]
        expected = np.zeros(models[0].values.size)
        for k in range(expected.size):
            expected[k] = sum(model.values[k] for model in models) / 5
        np.testing.assert_allclose(fedavg(models).values, expected, rtol=1e-15, atol=1e-15)

    def test_permutation_invariant(self, small_models):
        forward_order = fedavg(small_models).values
        for order in ([2, 0, 1], [1, 2, 0], [2, 1, 0]):
            assert fedavg([small_models[i] for i in order]).values.tobytes() == forward_order.tobytes()

    def test_duplicated_list(self, small_models):
        np.testing.assert_allclose(fedavg(small_models + small_models).values, fedavg(small_models).values, atol=1e-15)

    def test_sample_weights(self):
        a = ModelParams(((1, 1),), np.array([0.0, 0.0]))
        b = ModelParams(((1, 1),), np.array([4.0, 4.0]))
        np.testing.assert_allclose(fedavg([a, b], weights=[3, 1]).values, [1.0, 1.0])

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            fedavg([init_model(3, 4, 2, seed=0), init_model(3, 5, 2, seed=0)])

    def test_all_zero_weights(self, small_models):
        with pytest.raises(InvalidArgumentError):
            fedavg(small_models, weights=[0, 0, 0])

class TestSampleClients:
    def _region(self, size=10):
        dataset = Dataset(np.zeros((size, 1)), np.zeros(size, dtype=int), 2)
        model = init_model(1, 0, 2, seed=0)
        clients = [ClientState(k, Shard(np.array([k]), dataset.subset([k])), model) for k in range(size)]
        return RegionState(0, tuple(clients), model)

    def test_full_population(self):
        assert sample_clients(self._region(), 10, seed=0) == list(range(10))

    def test_same_seed_same_subset(self):
        region = self._region()
        assert sample_clients(region, 4, seed=9) == sample_clients(region, 4, seed=9)

    def test_distinct_ids(self):
        picked = sample_clients(self._region(), 6, seed=2)
        assert len(set(picked)) == 6

    def test_inclusion_frequency(self):
        region = self._region()
        draws = 40000
        inclusion = np.zeros(10)
        for seed in range(draws):
            inclusion[sample_clients(region, 3, seed)] += 1
        standard_error = np.sqrt(0.3 * 0.7 / draws)
        assert np.all(np.abs(inclusion / draws - 0.3) <= 3 * standard_error)

    def test_too_many(self):
        with pytest.raises(InvalidArgumentError):
            sample_clients(self._region(), 11, seed=0)

class TestDivergenceMetrics:
    def test_weight_divergence_identical(self, small_models):
        assert weight_divergence(small_models[0], small_models[0]) == 0.0

    def test_weight_divergence_unit_vector(self):
        a = ModelParams(((1, 1),), np.array([1.0, 1.0]))
        b = ModelParams(((1, 1),), np.array([0.0, 0.0]))
        assert weight_divergence(a, b) == pytest.approx(np.sqrt(2.0), abs=1e-15)

    def test_weight_divergence_oracle_and_triangle(self, small_models):
        a, b, c = small_models
        expected = np.sqrt(sum((x - y) ** 2 for x, y in zip(a.values, b.values)))
        assert weight_divergence(a, b) == pytest.approx(expected, abs=1e-12)
        assert weight_divergence(a, c) <= weight_divergence(a, b) + weight_divergence(b, c) + 1e-12

    def test_probability_distance(self):
        assert probability_distance([0.2, 0.8], [0.2, 0.8]) == 0.0
        assert probability_distance([1.0, 0.0], [0.0, 1.0]) == 2.0
        rng = np.random.default_rng(2)
        p, q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(6))
        assert probability_distance(p, q) == pytest.approx(sum(abs(x - y) for x, y in zip(p, q)), abs=1e-12)

    def test_probability_distance_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            probability_distance([0.5, 0.5], [1.0, 0.0, 0.0])

    def test_class_distribution(self):
        np.testing.assert_allclose(class_distribution(np.array([0, 0, 2, 1]), 4), [0.5, 0.25, 0.25, 0.0])
        np.testing.assert_array_equal(class_distribution(np.array([], dtype=int), 3), [0.0, 0.0, 0.0])

class TestGradientDissimilarity:
    def test_identical_shards(self, blob_dataset):
        model = init_model(4, 5, 3, seed=0)
        clients = [_client(k, blob_dataset, model) for k in range(3)]
        a, b = gradient_dissimilarity(clients, model)
        assert a == pytest.approx(b, abs=1e-10)

    def test_jensen_gap(self, blob_dataset):
        rng = np.random.default_rng(3)
        for trial in range(10):
            model = init_model(4, 5, 3, seed=trial)
            order = rng.permutation(blob_dataset.size)
            clients = [
                ClientState(k, Shard(np.sort(rows), blob_dataset.subset(np.sort(rows))), model)
                for k, rows in enumerate(np.array_split(order, 4))
            ]
            a, b = gradient_dissimilarity(clients, model)
            assert a >= b - 1e-12

    def test_matches_per_sample_recomputation(self, blob_dataset):
        model = init_model(4, 5, 3, seed=1)
        splits = [np.arange(0, 50), np.arange(50, 120), np.arange(120, 180)]
        clients = [ClientState(k, Shard(rows, blob_dataset.subset(rows)), model) for k, rows in enumerate(splits)]

        client_gradients = []
        for rows in splits:
            per_sample = [
                cross_entropy_gradient(model, blob_dataset.features[[i]], blob_dataset.labels[[i]])[1]
                for i in rows
            ]
            client_gradients.append(np.mean(per_sample, axis=0))
        client_gradients = np.array(client_gradients)

        a, b = gradient_dissimilarity(clients, model)
        assert a == pytest.approx(np.mean(np.sum(client_gradients ** 2, axis=1)), abs=1e-8)
        assert b == pytest.approx(np.sum(client_gradients.mean(axis=0) ** 2), abs=1e-8)

    def test_no_clients(self, small_models):
        with pytest.raises(InvalidArgumentError):
            gradient_dissimilarity([], small_models[0])
