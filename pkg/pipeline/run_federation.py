import argparse
from tqdm import tqdm

from utils.config import load_run_config
from utils.pipeline import add_common_arguments, run_command, ensure_output_directory
from distillKnowledge.main import export_reliability_csv
from reportMetrics.main import confusion_matrix, write_confusion_csv, write_runlog, top1_accuracy
from generateData.main import DataSource
from runFederation.main import run

def build_parser(parser=None):
    parser = parser or argparse.ArgumentParser(
        description="Pipeline Description: Run hierarchical federated training with label-driven distillation"
    )

    return add_common_arguments(parser)

def execute(args) -> str:
    cfg = load_run_config(args.config, args.seed)
    output_dir = ensure_output_directory(args.out)

    print("=" * 80)
    print(f"PIPELINE DESCRIPTION: RUN FEDERATION ({cfg.global_aggregator.upper()})")
    print("=" * 80)
    print(f"Rounds: {cfg.total_rounds} | rounds per episode: {cfg.rounds_per_episode} | epsilon: {cfg.distill.epsilon}")
    print(f"Injections: {len(cfg.injections)} | seed: {cfg.seed}\n")

    with tqdm(total=cfg.total_rounds, desc="Running rounds") as bar:
        runlog = run(cfg, progress=lambda _: bar.update(1))

    write_runlog(runlog, output_dir)
    if runlog.last_reliability is not None:
        export_reliability_csv(runlog.last_reliability, output_dir / "reliability.csv")

    test = DataSource(cfg.dataset, cfg.seed).test
    matrix = confusion_matrix(runlog.final_global, test)
    write_confusion_csv(matrix, output_dir / "confusion_global.csv")
    for region in runlog.final_regions:
        write_confusion_csv(confusion_matrix(region.regional_model, test), output_dir / f"confusion_region_{region.id}.csv")

    aggregators = runlog.aggregators

    print(f"\n{'=' * 60}")
    print("SUMMARY")
    print(f"Global steps: {len(aggregators)} (LKD: {aggregators.count('LKD')}, FedAvg: {aggregators.count('FedAvg')})")
    print(f"Files written to {output_dir}")
    print(f"{'=' * 60}")

    return f"run: {len(runlog.records)} rounds, final global top-1 {top1_accuracy(matrix):.4f}, tags {' '.join(aggregators)}"

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    return run_command(execute, args)

if __name__ == "__main__":
    raise SystemExit(main())
