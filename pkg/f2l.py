import sys
import argparse

from warnings import simplefilter
simplefilter(action="ignore")

from utils.pipeline import run_command
from pipeline import partition_dataset, run_federation, distill_global, verify_theory, generate_report, sweep_distillation

SUBCOMMANDS = {
    "partition": (partition_dataset, "Split a dataset into non-IID client shards and a server pool"),
    "run": (run_federation, "Run hierarchical federated training end to end"),
    "distill": (distill_global, "Train one episode of regions and distil a global student"),
    "verify-theory": (verify_theory, "Check the distillation theorems on random Gaussian ensembles"),
    "report": (generate_report, "Build the accuracy curve and per-class table of a finished run"),
    "sweep": (sweep_distillation, "Repeat a distillation experiment over several seeds"),
}

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="f2l",
        description="Hierarchical federated learning simulator with label-driven distillation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name, (module, help_text) in SUBCOMMANDS.items():
        subparser = subparsers.add_parser(name, help=help_text, description=help_text)
        module.build_parser(subparser)
        subparser.set_defaults(execute=module.execute)

    return parser

def run_cli(argv=None) -> int:
    """
    Parse the command line, run the chosen subcommand and return its exit status.

    Usage errors (unknown subcommand, missing flag) exit with status 2 like
    configuration errors do.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    return run_command(args.execute, args)

if __name__ == "__main__":
    sys.exit(run_cli())
