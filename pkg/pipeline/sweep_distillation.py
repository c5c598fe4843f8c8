import argparse
import pandas as pd
from tqdm import tqdm
from camel_converter import to_camel
from multiprocessing import Pool

from utils.errors import ConfigError
from utils.config import load_run_config
from utils.pipeline import add_common_arguments, run_command, ensure_output_directory, get_report_columns, atomic_write_csv
from runFederation.main import lambda3_sweep, server_size_sweep, run, injection_dip

SWEEP_KINDS = ["lambda3", "server_size", "injection"]

def _sweep_single_seed(args_tuple: tuple) -> tuple:
    """
    (Internal Helper) Run one sweep for one seed

    Args:
        args_tuple (tuple): (config path, kind, seed, window)

    Returns:
        tuple: (seed, success, message, result dataframe or None)
    """
    config_path, kind, seed, window = args_tuple
    try:
        cfg = load_run_config(config_path, seed)

        if kind == "lambda3":
            result = lambda3_sweep(cfg)
        elif kind == "server_size":
            result = server_size_sweep(cfg)
        else:
            if not cfg.injections:
                raise ConfigError("injections: the injection sweep needs at least one scheduled injection")
            injection_round = cfg.injections[0].round
            rows = []
            for aggregator in ("f2l", "fedavg"):
                runlog = run(cfg.model_copy(update={"global_aggregator": aggregator}))
                rows.append({
                    "seed": seed,
                    "aggregator": aggregator,
                    "injection_round": injection_round,
                    "dip": injection_dip(runlog, injection_round, window),
                })
            return seed, True, "", pd.DataFrame(rows)

        result.insert(1, "kind", kind)
        return seed, True, "", result

    except ConfigError:
        raise
    except Exception as e:
        return seed, False, str(e), None

def _resolve_seeds(args) -> list:
    """
    (Internal Helper) Seeds to sweep; an explicit --seed narrows the sweep to that one seed
    """
    if args.seed is not None:
        return [args.seed]

    return [int(seed.strip()) for seed in args.seeds.split(",")]

def build_parser(parser=None):
    parser = parser or argparse.ArgumentParser(
        description="Pipeline Description: Repeat a distillation experiment over several seeds"
    )

    add_common_arguments(parser)

    parser.add_argument(
        "--kind",
        type=str,
        choices=SWEEP_KINDS,
        default="lambda3",
        help="Which experiment to sweep (default: lambda3)",
    )

    parser.add_argument(
        "--seeds",
        type=str,
        default="0,1,2,3,4",
        help="Comma-separated root seeds; ignored when --seed is given (default: 0,1,2,3,4)",
    )

    parser.add_argument(
        "--window",
        type=int,
        default=4,
        help="Rounds after an injection scanned for the accuracy dip (default: 4)",
    )

    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="Number of parallel workers; 1 runs the seeds sequentially (default: 1)",
    )

    return parser

def execute(args) -> str:
    seeds = _resolve_seeds(args)
    load_run_config(args.config)
    output_dir = ensure_output_directory(args.out) / to_camel(f"{args.kind}_sweep")
    output_dir.mkdir(parents=True, exist_ok=True)

    print("=" * 80)
    print(f"PIPELINE DESCRIPTION: {args.kind.upper()} SWEEP")
    print("=" * 80)
    print(f"Seeds: {', '.join(map(str, seeds))}")
    print(f"Workers: {args.workers}\n")

    args_list = [(args.config, args.kind, seed, args.window) for seed in seeds]
    if args.workers > 1:
        with Pool(processes=args.workers) as pool:
            results = list(tqdm(pool.imap(_sweep_single_seed, args_list), total=len(args_list), desc="Sweeping seeds"))
    else:
        results = [_sweep_single_seed(item) for item in tqdm(args_list, desc="Sweeping seeds")]

    frames = [frame for _, success, _, frame in results if success]
    failed = [(seed, message) for seed, success, message, _ in results if not success]

    table_name = "injection_dip" if args.kind == "injection" else "sweep"
    if frames:
        combined = pd.concat(frames, ignore_index=True)[get_report_columns(table_name)]
        atomic_write_csv(combined, output_dir / f"{table_name}.csv")

    print(f"\n{'=' * 60}")
    if failed:
        print(f"Failed seeds ({len(failed)}):")
        for seed, message in failed:
            print(f"  - seed {seed}: {message}")
    else:
        print("All seeds successful!")
    print(f"{'=' * 60}")

    return f"sweep {args.kind}: {len(frames)}/{len(seeds)} seeds written to {output_dir}"

def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    return run_command(execute, args)

if __name__ == "__main__":
    raise SystemExit(main())
