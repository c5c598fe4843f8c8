import argparse

from utils.pipeline import add_common_arguments, run_command, ensure_output_directory, atomic_write_json
from verifyTheory.main import check_theorems

def build_parser(parser=None):
    parser = parser or argparse.ArgumentParser(
        description="Pipeline Description: Check the distillation theorems on random Gaussian teacher ensembles"
    )

    add_common_arguments(parser, with_config=False)

    parser.add_argument(
        "--trials",
        type=int,
        default=1000,
        help="Number of random ensembles (default: 1000)",
    )

    parser.add_argument(
        "--regions",
        type=int,
        default=3,
        help="Teachers per ensemble (default: 3)",
    )

    parser.add_argument(
        "--classes",
        type=int,
        default=5,
        help="Classes per ensemble (default: 5)",
    )

    parser.add_argument(
        "--inverted",
        dest="inverted",
        action="store_true",
        help="Reverse the teacher ordering; violations are expected",
    )

    parser.set_defaults(inverted=False)

    return parser

def execute(args) -> str:
    output_dir = ensure_output_directory(args.out)
    seed = args.seed if args.seed is not None else 0

    print("=" * 80)
    print("PIPELINE DESCRIPTION: VERIFY THEORY")
    print("=" * 80)
    print(f"Trials: {args.trials} | regions: {args.regions} | classes: {args.classes} | inverted: {args.inverted}\n")

    report = check_theorems(args.trials, args.regions, args.classes, seed, inverted=args.inverted)
    atomic_write_json(report, output_dir / "theory_report.json")

    return (
        f"verify-theory: {report['trials']} trials, violations t1={report['violations_t1']} "
        f"t2={report['violations_t2']}, max gaps {report['max_gap_t1']:.3e} / {report['max_gap_t2']:.3e}"
    )

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    return run_command(execute, args)

if __name__ == "__main__":
    raise SystemExit(main())
