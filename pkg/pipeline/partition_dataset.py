import argparse
import numpy as np
import pandas as pd
from pathlib import Path

from utils.config import load_run_config
from utils.pipeline import add_common_arguments, run_command, ensure_output_directory, get_report_columns, derive_int_seed, atomic_write_csv
from generateData.main import DataSource, dirichlet_partition, export_dataset_csv

def build_parser(parser=None):
    parser = parser or argparse.ArgumentParser(
        description="Pipeline Description: Split a dataset into non-IID client shards and a server pool"
    )

    return add_common_arguments(parser)

def execute(args) -> str:
    cfg = load_run_config(args.config, args.seed)
    output_dir = ensure_output_directory(args.out)

    print("=" * 80)
    print("PIPELINE DESCRIPTION: PARTITION DATASET")
    print("=" * 80)
    print(f"Source: {cfg.dataset.source} | alpha: {cfg.partition.alpha} | regions: {cfg.partition.regions} | clients per region: {cfg.partition.clients_per_region}")

    source = DataSource(cfg.dataset, cfg.seed)
    plan = cfg.partition
    if plan.seed is None:
        plan = plan.model_copy(update={"seed": derive_int_seed(cfg.seed, "partition")})
    partition, server_pool = dirichlet_partition(source.train, plan)

    class_columns = [f"class_{c}" for c in range(source.train.class_count)]
    prefix = get_report_columns("partition")
    rows = []
    for region_id, shards in sorted(partition.items()):
        for client_id, shard in sorted(shards.items()):
            rows.append([region_id, client_id, shard.size, *shard.class_counts()])
    rows.append(["server", "server", server_pool.size, *server_pool.class_counts()])

    partition_table = pd.DataFrame(rows, columns=prefix + class_columns)
    atomic_write_csv(partition_table, output_dir / "partition.csv")
    export_dataset_csv(server_pool.data, output_dir / "server_pool.csv")

    client_sizes = partition_table.loc[partition_table["client"] != "server", "samples"].astype(int)

    print(f"\n{'=' * 60}")
    print("SUMMARY")
    print(f"Clients: {len(client_sizes)} | smallest shard: {client_sizes.min()} | largest shard: {client_sizes.max()}")
    print(f"Files written to {Path(output_dir)}")
    print(f"{'=' * 60}")

    return f"partition: {len(client_sizes)} clients, server pool {server_pool.size}, median shard {int(np.median(client_sizes))} samples"

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    return run_command(execute, args)

if __name__ == "__main__":
    raise SystemExit(main())
