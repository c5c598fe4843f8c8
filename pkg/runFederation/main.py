import time
import numpy as np
import pandas as pd

from utils.errors import ConfigError, InvalidArgumentError
from utils.pipeline import derive_int_seed, derive_rng
from utils.config import RunConfig
from generateData.main import DataSource, dirichlet_partition
from trainNetworks.model import init_model
from federateClients.state import ClientState, RegionState
from federateClients.main import local_train, fedavg, sample_clients
from distillKnowledge.structures import ReliabilityMatrix
from distillKnowledge.losses import lambda1_for_hard_weight, lambda_schedule
from distillKnowledge.main import class_reliability, distill, default_student
from reportMetrics.main import confusion_matrix, per_class_accuracy
from runFederation.runlog import RoundRecord, RunLog, AGGREGATOR_LKD, AGGREGATOR_FEDAVG, AGGREGATOR_NONE, nan_to_none
from runFederation.helper import _build_regions, _inject_region, _broadcast, _top1, _mean_probability_distance

LAMBDA3_GRID = (0.0, 0.001, 0.01, 0.1, 0.5, 1.0)
SERVER_SIZE_GRID = (1.0, 1 / 2, 1 / 4, 1 / 6, 1 / 8, 1 / 10)

def beta_spread(rel: ReliabilityMatrix) -> float:
    """
    Worst-class disagreement of the teachers' reliabilities: max_c (max_r beta[r, c] - min_r beta[r, c]).
    """
    return float(np.max(rel.beta.max(axis=0) - rel.beta.min(axis=0)))

def train_region_round(region: RegionState, client_config, round_index: int, root_seed: int) -> (RegionState, list):
    """
    One regional round: the participants train locally from the regional model and are averaged.

    Only the region's own clients and its own model are read.

    Args:
        region (RegionState): The region at the start of the round
        client_config (ClientTrainingConfig): Local training settings
        round_index (int): 1-based round number, part of every seed stream name
        root_seed (int): Root seed of the run

    Returns:
        tuple: (updated RegionState, ids of the participating clients)
    """
    participant_ids = region.client_ids
    if client_config.clients_per_round is not None:
        k = min(client_config.clients_per_round, len(participant_ids))
        participant_ids = sample_clients(region, k, derive_int_seed(root_seed, f"sample:{region.id}:{round_index}"))

    trained = {}
    for client_id in participant_ids:
        client = region.client(client_id)
        trained[client_id] = local_train(
            client,
            region.regional_model,
            client_config.epochs,
            client_config.lr,
            client_config.batch_size,
            derive_int_seed(root_seed, f"client:{client_id}:round:{round_index}"),
        )

    weights = None
    if client_config.weighting == "samples":
        weights = [region.client(client_id).sample_count for client_id in participant_ids]
    regional_model = fedavg([trained[client_id] for client_id in participant_ids], weights)

    clients = tuple(
        ClientState(client.id, client.shard, trained.get(client.id, client.model)) for client in region.clients
    )

    return RegionState(region.id, clients, regional_model), participant_ids

def global_step(regions: list, global_model, pool, valset, cfg: RunConfig, episode: int = 0) -> tuple:
    """
    Global aggregation at the end of an episode.

    With the f2l aggregator, the teachers' class reliabilities are scored first;
    if their worst-class spread reaches epsilon the regional models are distilled
    into a new global model (tag LKD), otherwise they are averaged uniformly
    (tag FedAvg). An infinite epsilon, or the fedavg aggregator, skips the
    reliability scoring altogether.

    Args:
        regions (list): RegionStates in region order
        global_model (ModelParams): The current global model, used as the old model of the update term
        pool (Dataset): The labeled server pool
        valset (Dataset): Data for the reliability scores
        cfg (RunConfig): The run configuration
        episode (int): Episode number, part of the distillation seed stream

    Returns:
        tuple: (new global model, aggregator tag, beta spread or None, ReliabilityMatrix or None)
    """
    teachers = [region.regional_model for region in sorted(regions, key=lambda region: region.id)]
    averaged = fedavg(teachers)
    epsilon = cfg.distill.epsilon

    if cfg.global_aggregator == "fedavg" or np.isinf(epsilon):
        return averaged, AGGREGATOR_FEDAVG, None, None

    rel = class_reliability(teachers, valset, cfg.distill.reliability_temperature)
    spread = beta_spread(rel)
    if spread < epsilon:
        return averaged, AGGREGATOR_FEDAVG, spread, rel

    student = distill(
        teachers,
        averaged,
        global_model,
        pool,
        valset,
        cfg.distill,
        seed=derive_int_seed(cfg.seed, f"distill:episode:{episode}"),
    )

    return student, AGGREGATOR_LKD, spread, rel

def _evaluate(global_model, regions: list, test) -> (float, list, list):
    """
    (Internal Helper) Global top-1, regional top-1s and per-class accuracy on the test set
    """
    matrix = confusion_matrix(global_model, test)
    global_top1 = float(np.trace(matrix) / matrix.sum())
    region_accuracies = [_top1(region.regional_model, test) for region in regions]

    return global_top1, region_accuracies, nan_to_none(per_class_accuracy(matrix))

def prepare_federation(cfg: RunConfig) -> dict:
    """
    Data, partition and initial model of a run.

    Returns:
        dict: {'source', 'regions', 'pool', 'valset', 'test', 'initial_model'}

    Raises:
        InfeasiblePartitionError: If the partition cannot serve every client
        ConfigError: If an f2l run has no server pool to score teachers on
    """
    source = DataSource(cfg.dataset, cfg.seed)
    plan = cfg.partition
    if plan.seed is None:
        plan = plan.model_copy(update={"seed": derive_int_seed(cfg.seed, "partition")})
    partition, pool = dirichlet_partition(source.train, plan)

    if pool.size == 0 and cfg.global_aggregator == "f2l" and not np.isinf(cfg.distill.epsilon):
        raise ConfigError("partition.server_fraction: the f2l aggregator needs a non-empty server pool")

    initial_model = init_model(
        source.train.feature_dim,
        cfg.hidden_width,
        source.train.class_count,
        derive_int_seed(cfg.seed, "init"),
    )

    return {
        "source": source,
        "regions": _build_regions(partition, initial_model),
        "pool": pool.data,
        "valset": pool.data,
        "test": source.test,
        "initial_model": initial_model,
    }

def run(cfg: RunConfig, progress=None) -> RunLog:
    """
    Full hierarchical run: regional rounds, a global step every episode, scheduled region injections.

    Every round the regions train their clients and average them; every
    rounds_per_episode rounds the global step runs and its result is broadcast
    to all regions. Injected regions join at the start of their round with the
    current global model. Regional accuracies, and the final_regions kept on
    the log, are those of the regional models before the broadcast.

    Args:
        cfg (RunConfig): The run configuration
        progress (callable, optional): Called with the round number after each round

    Returns:
        RunLog: One record per round
    """
    setup = prepare_federation(cfg)
    source = setup["source"]
    regions = setup["regions"]
    pool, valset, test = setup["pool"], setup["valset"], setup["test"]
    global_model = setup["initial_model"]

    injections = {}
    for index, injection in enumerate(cfg.injections):
        if injection.round > cfg.total_rounds:
            raise ConfigError(f"injections.{index}.round: {injection.round} is after the last round {cfg.total_rounds}")
        injections.setdefault(injection.round, []).append((index, injection))

    runlog = RunLog()
    episode = 0
    for round_index in range(1, cfg.total_rounds + 1):
        for index, injection in injections.get(round_index, []):
            next_client_id = max(client.id for region in regions for client in region.clients) + 1
            regions.append(_inject_region(source, injection, index, len(regions), next_client_id, global_model, cfg.seed))

        participants = []
        updated = []
        for region in regions:
            region, participant_ids = train_region_round(region, cfg.client, round_index, cfg.seed)
            updated.append(region)
            participants.extend(participant_ids)
        regions = updated
        # regional teachers as trained this round, before any broadcast
        trained_regions = regions

        aggregator, spread, seconds = AGGREGATOR_NONE, None, 0.0
        if round_index % cfg.rounds_per_episode == 0:
            started = time.perf_counter()
            global_model, aggregator, spread, rel = global_step(regions, global_model, pool, valset, cfg, episode)
            if cfg.record_wall_clock:
                seconds = time.perf_counter() - started
            if rel is not None:
                runlog.last_reliability = rel
            regions = _broadcast(regions, global_model)
            episode += 1

        global_top1, region_accuracies, class_accuracy = _evaluate(global_model, trained_regions, test)
        runlog.append(RoundRecord(
            round=round_index,
            episode=episode,
            aggregator=aggregator,
            global_top1=global_top1,
            region_accuracies=region_accuracies,
            per_class_accuracy=class_accuracy,
            beta_spread=spread,
            probability_distance=_mean_probability_distance(regions, participants, test.class_count),
            seconds_global_step=float(seconds),
        ))
        if progress is not None:
            progress(round_index)

    runlog.final_global = global_model
    runlog.final_regions = trained_regions

    return runlog

def train_teachers(cfg: RunConfig) -> dict:
    """
    Run the first episode's regional rounds and stop before the global step.

    Returns:
        dict: prepare_federation's output plus 'teachers' (regional models) and 'student_init'
    """
    setup = prepare_federation(cfg)
    regions = setup["regions"]
    for round_index in range(1, cfg.rounds_per_episode + 1):
        regions = [train_region_round(region, cfg.client, round_index, cfg.seed)[0] for region in regions]

    teachers = [region.regional_model for region in regions]

    return {**setup, "regions": regions, "teachers": teachers, "student_init": default_student(teachers)}

def distill_report(cfg: RunConfig, lambdas: tuple = None, pool=None) -> pd.DataFrame:
    """
    Teacher versus student top-1 of one distillation step.

    Returns:
        pd.DataFrame: columns model, top1; one row per region and a final 'student' row
    """
    task = train_teachers(cfg)
    student = distill(
        task["teachers"],
        task["student_init"],
        task["initial_model"],
        pool if pool is not None else task["pool"],
        task["valset"],
        cfg.distill,
        seed=derive_int_seed(cfg.seed, "distill:episode:0"),
        lambdas=lambdas,
    )

    rows = [{"model": f"region_{r}", "top1": _top1(teacher, task["test"])} for r, teacher in enumerate(task["teachers"])]
    rows.append({"model": "student", "top1": _top1(student, task["test"])})

    return pd.DataFrame(rows)

def lambda3_sweep(cfg: RunConfig, lambda3_values: tuple = LAMBDA3_GRID) -> pd.DataFrame:
    """
    Student top-1 for a range of hard-loss coefficients, the soft coefficients sharing the rest.

    The teachers are trained once and reused for every coefficient.

    Returns:
        pd.DataFrame: columns seed, value, student_top1, best_teacher_top1
    """
    task = train_teachers(cfg)
    region_count = len(task["teachers"])
    use_update = cfg.distill.use_update_distillation
    best_teacher = max(_top1(teacher, task["test"]) for teacher in task["teachers"])

    rows = []
    for lambda3 in lambda3_values:
        lambda1 = lambda1_for_hard_weight(region_count, lambda3, use_update)
        lambda2, _ = lambda_schedule(region_count, lambda1, use_update)
        student = distill(
            task["teachers"],
            task["student_init"],
            task["initial_model"],
            task["pool"],
            task["valset"],
            cfg.distill,
            seed=derive_int_seed(cfg.seed, "distill:episode:0"),
            lambdas=(lambda1, lambda2, float(lambda3)),
        )
        rows.append({"seed": cfg.seed, "value": float(lambda3), "student_top1": _top1(student, task["test"]), "best_teacher_top1": best_teacher})

    return pd.DataFrame(rows)

def server_size_sweep(cfg: RunConfig, fractions: tuple = SERVER_SIZE_GRID) -> pd.DataFrame:
    """
    Student top-1 when only a fraction of the server pool is available for distillation and scoring.

    Returns:
        pd.DataFrame: columns seed, value, student_top1, best_teacher_top1
    """
    task = train_teachers(cfg)
    pool = task["pool"]
    best_teacher = max(_top1(teacher, task["test"]) for teacher in task["teachers"])
    order = derive_rng(cfg.seed, "server_size").permutation(pool.size)

    rows = []
    for fraction in fractions:
        if not 0 < fraction <= 1:
            raise InvalidArgumentError(f"pool fraction must lie in (0, 1], got {fraction}")
        kept = pool.subset(np.sort(order[: max(1, int(round(fraction * pool.size)))]))
        student = distill(
            task["teachers"],
            task["student_init"],
            task["initial_model"],
            kept,
            kept,
            cfg.distill,
            seed=derive_int_seed(cfg.seed, "distill:episode:0"),
        )
        rows.append({"seed": cfg.seed, "value": float(fraction), "student_top1": _top1(student, task["test"]), "best_teacher_top1": best_teacher})

    return pd.DataFrame(rows)

def injection_dip(runlog: RunLog, injection_round: int, window: int) -> float:
    """
    Accuracy lost after a region joins: global top-1 just before the injection minus the
    lowest global top-1 over the `window` rounds starting at the injection round.
    """
    if not 2 <= injection_round <= len(runlog.records):
        raise InvalidArgumentError(f"injection round {injection_round} has no preceding round in the log")
    if window < 1:
        raise InvalidArgumentError(f"window must be positive, got {window}")

    accuracies = runlog.global_top1()
    before = accuracies[injection_round - 2]
    after = accuracies[injection_round - 1: injection_round - 1 + window]

    return float(before - min(after))
