import numpy as np
import pandas as pd
from pathlib import Path

from utils.errors import InvalidArgumentError, InfeasiblePartitionError, IdxFormatError, ConfigError
from utils.pipeline import derive_int_seed, atomic_write_csv
from generateData.dataset import Dataset, Shard, GmmSpec
from generateData.helper import (
    IDX_IMAGES_MAGIC,
    IDX_LABELS_MAGIC,
    _read_idx_payload,
    _idx_bytes,
    _split_class_counts,
    _client_layout,
    _check_every_client_served,
)

def make_gmm_spec(class_count: int, feature_dim: int, class_separation: float, feature_variance: float, seed: int) -> GmmSpec:
    """
    Draw a random Gaussian mixture with uniform class weights.

    Class means are N(0, separation^2 / d) per coordinate, so the expected squared
    distance between two class means is 2 * separation^2 whatever the dimension.

    Args:
        class_count (int): Number of classes C
        feature_dim (int): Feature dimension d
        class_separation (float): Scale of the class means
        feature_variance (float): Shared diagonal variance of every class
        seed (int): Seed of the mean draw

    Returns:
        GmmSpec: The mixture
    """
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((class_count, feature_dim)) * class_separation / np.sqrt(feature_dim)
    variances = np.full((class_count, feature_dim), float(feature_variance))
    weights = np.full(class_count, 1.0 / class_count)

    return GmmSpec(means, variances, weights)

def gmm_sample(spec: GmmSpec, n: int, seed: int) -> Dataset:
    """
    Draw n i.i.d. samples: class ~ Categorical(weights), features ~ Normal(mean_c, diag(var_c)).

    Args:
        spec (GmmSpec): The mixture to sample from
        n (int): Number of samples, n >= 0
        seed (int): Seed of the draw

    Returns:
        Dataset: The sampled dataset

    Raises:
        InvalidArgumentError: If n is negative
    """
    if n < 0:
        raise InvalidArgumentError(f"sample count must be non-negative, got {n}")

    rng = np.random.default_rng(seed)
    labels = rng.choice(spec.class_count, size=n, p=spec.weights)
    noise = rng.standard_normal((n, spec.feature_dim))
    features = spec.means[labels] + np.sqrt(spec.variances[labels]) * noise

    return Dataset(features.reshape(n, spec.feature_dim), labels, spec.class_count)

def dirichlet_partition(ds: Dataset, plan) -> (dict, Shard):
    """
    Split a dataset into a server pool and non-IID client shards grouped by region.

    The server pool (server_fraction of the rows) is drawn uniformly first. Every
    class of the remaining rows is then spread over all clients with proportions
    drawn from Dirichlet(alpha, ..., alpha). Shards are disjoint and, together
    with the server pool, cover the dataset exactly.

    Args:
        ds (Dataset): The dataset to split
        plan (PartitionPlan): alpha, regions, clients_per_region, server_fraction and seed

    Returns:
        tuple: ({region: {client_id: Shard}}, server_pool Shard). Client ids are
               global integers in region-major order.

    Raises:
        InvalidArgumentError: If the dataset is empty
        InfeasiblePartitionError: If some client would receive no sample at all
    """
    if ds.size == 0:
        raise InvalidArgumentError("cannot partition an empty dataset")

    seed = plan.seed if plan.seed is not None else 0
    rng = np.random.default_rng(seed)
    client_count = plan.regions * plan.clients_per_region

    permutation = rng.permutation(ds.size)
    server_size = int(np.floor(plan.server_fraction * ds.size))
    server_indices = np.sort(permutation[:server_size])
    remaining = np.sort(permutation[server_size:])

    if remaining.size < client_count:
        raise InfeasiblePartitionError(
            f"{remaining.size} samples left after the server pool cannot serve {client_count} clients"
        )

    client_indices = [[] for _ in range(client_count)]
    totals = np.zeros(client_count, dtype=np.int64)
    remaining_labels = ds.labels[remaining]

    for c in range(ds.class_count):
        class_rows = remaining[remaining_labels == c]
        proportions = rng.dirichlet(np.full(client_count, plan.alpha))
        if class_rows.size == 0:
            continue

        class_rows = rng.permutation(class_rows)
        counts = _split_class_counts(class_rows.size, proportions, totals)
        for k, chunk in enumerate(np.split(class_rows, np.cumsum(counts)[:-1])):
            client_indices[k].append(chunk)
        totals += counts

    _check_every_client_served(totals)

    regions = {}
    for region, client_id in _client_layout(plan.regions, plan.clients_per_region):
        indices = np.sort(np.concatenate(client_indices[client_id]).astype(np.int64))
        regions.setdefault(region, {})[client_id] = Shard(indices, ds.subset(indices))

    server_pool = Shard(server_indices, ds.subset(server_indices))

    return regions, server_pool

def load_idx(images_path: str, labels_path: str, class_count: int = None) -> Dataset:
    """
    Read an MNIST-style IDX image/label pair.

    Pixels are scaled to [0, 1] and every image is flattened to one feature row.

    Args:
        images_path (str): IDX file with magic 0x00000803
        labels_path (str): IDX file with magic 0x00000801
        class_count (int, optional): Number of classes; defaults to max label + 1

    Returns:
        Dataset: The decoded dataset

    Raises:
        IdxFormatError: On a wrong magic number, a truncated payload, mismatched counts
                        or a label outside the class range
    """
    image_dims, image_payload = _read_idx_payload(images_path, IDX_IMAGES_MAGIC)
    label_dims, label_payload = _read_idx_payload(labels_path, IDX_LABELS_MAGIC)

    if len(image_dims) != 3 or len(label_dims) != 1:
        raise IdxFormatError("expected 3-D image and 1-D label files")
    if image_dims[0] != label_dims[0]:
        raise IdxFormatError(f"{image_dims[0]} images but {label_dims[0]} labels")

    features = image_payload.reshape(image_dims[0], image_dims[1] * image_dims[2]).astype(np.float64) / 255.0
    labels = label_payload.astype(np.int64)

    if class_count is None:
        class_count = int(labels.max()) + 1 if labels.size else 1
    if labels.size and int(labels.max()) >= class_count:
        raise IdxFormatError(f"label {int(labels.max())} out of range for {class_count} classes")

    return Dataset(features, labels, class_count)

def write_idx(images: np.ndarray, labels: np.ndarray, images_path: str, labels_path: str) -> None:
    """
    Write an uint8 image stack (n x rows x cols) and its labels as an IDX pair.
    """
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8).reshape(-1)
    if images.ndim != 3:
        raise InvalidArgumentError("images must be an (n x rows x cols) array")

    Path(images_path).write_bytes(_idx_bytes(IDX_IMAGES_MAGIC, images.shape, images))
    Path(labels_path).write_bytes(_idx_bytes(IDX_LABELS_MAGIC, labels.shape, labels))

def export_dataset_csv(ds: Dataset, path: str) -> Path:
    """
    Export a dataset as CSV with header feature_0..feature_{d-1},label.
    """
    columns = [f"feature_{j}" for j in range(ds.feature_dim)]
    data = pd.DataFrame(ds.features, columns=columns)
    data["label"] = ds.labels

    return atomic_write_csv(data, Path(path))

def read_dataset_csv(path: str, class_count: int) -> Dataset:
    """
    Read a CSV written by export_dataset_csv.
    """
    data = pd.read_csv(Path(path), float_precision="round_trip")
    feature_columns = [col for col in data.columns if col.startswith("feature_")]

    return Dataset(data[feature_columns].to_numpy(dtype=np.float64), data["label"].to_numpy(), class_count)

class DataSource:
    """
    Train/test data of an experiment plus a supply of fresh samples for injected regions.

    GMM sources draw new samples from the same mixture; IDX sources hand out
    training rows that the capped training subset left unused.
    """
    def __init__(self, dataset_config, root_seed: int):
        self.config = dataset_config
        self.root_seed = root_seed
        self.spec = None
        self._reserve = None

        if dataset_config.source == "gmm":
            self.spec = make_gmm_spec(
                dataset_config.class_count,
                dataset_config.feature_dim,
                dataset_config.class_separation,
                dataset_config.feature_variance,
                derive_int_seed(root_seed, "gmm:spec"),
            )
            self.train = gmm_sample(self.spec, dataset_config.train_samples, derive_int_seed(root_seed, "gmm:train"))
            self.test = gmm_sample(self.spec, dataset_config.test_samples, derive_int_seed(root_seed, "gmm:test"))
        else:
            full_train = load_idx(dataset_config.train_images, dataset_config.train_labels, dataset_config.class_count)
            self.test = load_idx(dataset_config.test_images, dataset_config.test_labels, dataset_config.class_count)
            order = np.random.default_rng(derive_int_seed(root_seed, "idx:subset")).permutation(full_train.size)
            cap = dataset_config.max_samples or full_train.size
            self.train = full_train.subset(np.sort(order[:cap]))
            self._reserve = full_train.subset(order[cap:])
        self._reserve_cursor = 0

    def sample_injection(self, samples: int, injection_index: int) -> Dataset:
        """
        Fresh samples, never seen by the initial regions, for an injected region.

        Raises:
            ConfigError: If an IDX source has fewer unused rows than requested
        """
        seed = derive_int_seed(self.root_seed, f"inject:{injection_index}")
        if self.spec is not None:
            return gmm_sample(self.spec, samples, seed)

        available = self._reserve.size - self._reserve_cursor
        if available < samples:
            raise ConfigError(
                f"injections[{injection_index}].samples: only {available} unused training rows are available"
            )
        # the reserve is already shuffled; injected regions never share rows
        picked = np.arange(self._reserve_cursor, self._reserve_cursor + samples)
        self._reserve_cursor += samples

        return self._reserve.subset(picked)
