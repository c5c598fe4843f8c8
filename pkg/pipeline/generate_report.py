import argparse

from utils.pipeline import add_common_arguments, run_command, ensure_output_directory
from reportMetrics.main import build_report

def build_parser(parser=None):
    parser = parser or argparse.ArgumentParser(
        description="Pipeline Description: Build the accuracy curve and per-class table of a finished run"
    )

    add_common_arguments(parser, with_config=False)

    parser.add_argument(
        "--run_dir",
        type=str,
        default=None,
        help="Folder holding runlog.jsonl and summary.csv (default: --out)",
    )

    return parser

def execute(args) -> str:
    output_dir = ensure_output_directory(args.out)
    run_dir = args.run_dir or output_dir

    print("=" * 80)
    print("PIPELINE DESCRIPTION: GENERATE REPORT")
    print("=" * 80)

    report = build_report(run_dir, output_dir)
    for path in report["files"]:
        print(f"  - {path}")

    return (
        f"report: {report['rounds']} rounds, final global top-1 {report['final_global_top1']:.4f}, "
        f"LKD steps {report['lkd_steps']}, FedAvg steps {report['fedavg_steps']}"
    )

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    return run_command(execute, args)

if __name__ == "__main__":
    raise SystemExit(main())
