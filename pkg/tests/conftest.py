import copy
import numpy as np
import pytest

from utils.config import parse_run_config
from generateData.dataset import Dataset
from trainNetworks.model import init_model

TINY_PAYLOAD = {
    "dataset": {
        "source": "gmm",
        "class_count": 3,
        "feature_dim": 4,
        "class_separation": 4.0,
        "train_samples": 300,
        "test_samples": 150,
    },
    "partition": {
        "alpha": 0.5,
        "regions": 2,
        "clients_per_region": 2,
        "server_fraction": 0.2,
    },
    "client": {
        "epochs": 1,
        "lr": 0.05,
        "batch_size": 16,
    },
    "distill": {
        "server_epochs": 2,
        "server_batch_size": 32,
    },
    "rounds_per_episode": 1,
    "total_rounds": 2,
    "hidden_width": 8,
    "seed": 3,
}

@pytest.fixture
def tiny_payload():
    return copy.deepcopy(TINY_PAYLOAD)

@pytest.fixture
def tiny_config(tiny_payload):
    return parse_run_config(tiny_payload)

@pytest.fixture
def blob_dataset():
    """
    Three well separated Gaussian blobs in 4 dimensions, 60 samples per class.
    """
    rng = np.random.default_rng(11)
    centers = np.array([[3.0, 0, 0, 0], [0, 3.0, 0, 0], [0, 0, 3.0, 0]])
    labels = np.repeat(np.arange(3), 60)
    features = centers[labels] + 0.5 * rng.standard_normal((labels.size, 4))

    return Dataset(features, labels, 3)

@pytest.fixture
def small_models():
    return [init_model(4, 6, 3, seed) for seed in range(3)]
