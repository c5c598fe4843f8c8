import numpy as np

from utils.pipeline import derive_int_seed
from utils.config import PartitionPlan
from generateData.main import dirichlet_partition
from trainNetworks.main import predict
from federateClients.state import ClientState, RegionState
from federateClients.main import class_distribution, probability_distance

def _build_regions(partition: dict, model) -> list:
    """
    (Internal Helper) Turn {region: {client_id: Shard}} into RegionStates starting from one model

    Returns:
        list: RegionStates in ascending region order
    """
    regions = []
    for region_id in sorted(partition):
        clients = [ClientState(client_id, shard, model) for client_id, shard in sorted(partition[region_id].items())]
        regions.append(RegionState(region_id, tuple(clients), model))

    return regions

def _inject_region(data_source, injection, injection_index: int, region_id: int, first_client_id: int, model, root_seed: int) -> RegionState:
    """
    (Internal Helper) Create a new non-IID region from fresh samples

    Its clients continue the global client numbering and it starts from the
    current global model.
    """
    samples = data_source.sample_injection(injection.samples, injection_index)
    plan = PartitionPlan(
        alpha=injection.alpha,
        regions=1,
        clients_per_region=injection.clients,
        server_fraction=0.0,
        seed=derive_int_seed(root_seed, f"inject:{injection_index}:partition"),
    )
    partition, _ = dirichlet_partition(samples, plan)
    shards = partition[0]
    clients = [ClientState(first_client_id + local_id, shard, model) for local_id, shard in sorted(shards.items())]

    return RegionState(region_id, tuple(clients), model)

def _broadcast(regions: list, model) -> list:
    """
    (Internal Helper) Set every region's model (and its clients' models) to the global model
    """
    return [
        RegionState(region.id, tuple(ClientState(c.id, c.shard, model) for c in region.clients), model)
        for region in regions
    ]

def _top1(model, dataset) -> float:
    """
    (Internal Helper) Share of correctly predicted samples
    """
    if dataset.size == 0:
        return float("nan")

    return float(np.mean(predict(model, dataset.features) == dataset.labels))

def _mean_probability_distance(regions: list, participant_ids: list, class_count: int) -> float:
    """
    (Internal Helper) Mean L1 distance between each participant's label distribution and the pooled one
    """
    clients = {client.id: client for region in regions for client in region.clients}
    pooled = class_distribution(np.concatenate([client.shard.data.labels for client in clients.values()]), class_count)
    distances = [
        probability_distance(class_distribution(clients[client_id].shard.data.labels, class_count), pooled)
        for client_id in participant_ids
    ]

    return float(np.mean(distances)) if distances else float("nan")
