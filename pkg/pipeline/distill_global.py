import argparse

from utils.config import load_run_config
from utils.pipeline import add_common_arguments, run_command, ensure_output_directory, get_report_columns, atomic_write_csv
from runFederation.main import distill_report

def build_parser(parser=None):
    parser = parser or argparse.ArgumentParser(
        description="Pipeline Description: Train one episode of regions and distil them into a global student"
    )

    return add_common_arguments(parser)

def execute(args) -> str:
    cfg = load_run_config(args.config, args.seed)
    output_dir = ensure_output_directory(args.out)

    print("=" * 80)
    print("PIPELINE DESCRIPTION: DISTILL GLOBAL STUDENT")
    print("=" * 80)
    print(f"Regions: {cfg.partition.regions} | server epochs: {cfg.distill.server_epochs} | T: {cfg.distill.temperature}\n")

    report = distill_report(cfg)[get_report_columns("distill_report")]
    atomic_write_csv(report, output_dir / "distill_report.csv")

    teachers = report[report["model"] != "student"]
    student_top1 = float(report.loc[report["model"] == "student", "top1"].iloc[0])

    print(f"\n{'=' * 60}")
    print("SUMMARY")
    for _, row in report.iterrows():
        print(f"  - {row['model']}: {row['top1']:.4f}")
    print(f"{'=' * 60}")

    return f"distill: student top-1 {student_top1:.4f}, best teacher {teachers['top1'].max():.4f}"

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    return run_command(execute, args)

if __name__ == "__main__":
    raise SystemExit(main())
