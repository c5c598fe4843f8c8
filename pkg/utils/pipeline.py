import os
import sys
import json
import yaml
import hashlib
import tempfile
import numpy as np
import pandas as pd
from pathlib import Path

from utils.errors import ConfigError, InvalidArgumentError, IdxFormatError, InfeasiblePartitionError

REPORT_COLUMNS_PATH = Path(__file__).resolve().parent.parent / "data" / "report_columns.yaml"
DEFAULT_OUTPUT_DIR = "data/federation/output"

EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3

def derive_seed(root_seed: int, stream_name: str) -> np.random.SeedSequence:
    """
    Derive an independent seed sequence for a named sub-stream of the root seed.

    Stream names look like "partition", "client:r0c3:round:7" or "distill:episode:2".
    The name is hashed, so the derived stream does not depend on the order in
    which other streams are requested.

    Args:
        root_seed (int): The experiment's root seed
        stream_name (str): The name of the component asking for randomness

    Returns:
        np.random.SeedSequence: The seed sequence of the named stream
    """
    digest = hashlib.sha256(stream_name.encode("utf-8")).digest()
    words = np.frombuffer(digest[:16], dtype="<u4").tolist()

    return np.random.SeedSequence([int(root_seed) & 0xFFFFFFFF, *words])

def derive_rng(root_seed: int, stream_name: str) -> np.random.Generator:
    """
    Build a numpy Generator for a named sub-stream of the root seed.

    Args:
        root_seed (int): The experiment's root seed
        stream_name (str): The name of the component asking for randomness

    Returns:
        np.random.Generator: A generator owned by that component only
    """
    return np.random.default_rng(derive_seed(root_seed, stream_name))

def derive_int_seed(root_seed: int, stream_name: str) -> int:
    """
    Collapse a named sub-stream into a single 32-bit integer seed.
    """
    return int(derive_seed(root_seed, stream_name).generate_state(1)[0])

def get_report_columns(table_name: str) -> list:
    """
    Get the fixed column order of an exported table.

    Args:
        table_name (str): The table key in data/report_columns.yaml (e.g. 'summary')

    Returns:
        list: The column names in their documented order

    Raises:
        KeyError: If the table is not declared
    """
    with open(REPORT_COLUMNS_PATH, "r") as f:
        columns_information = yaml.safe_load(f)

    return list(columns_information[table_name])

def ensure_output_directory(output_dir: str) -> Path:
    """
    Create the output directory (and parents) if it does not exist yet.
    """
    path = Path(output_dir)
    path.mkdir(parents=True, exist_ok=True)

    return path

def atomic_write_text(path: Path, text: str) -> Path:
    """
    Write a text file so that it is either fully written or not created at all.

    The content goes to a temporary file in the same folder first and is
    renamed over the target once it has been flushed.

    Args:
        path (Path): The final file path
        text (str): The content to write

    Returns:
        Path: The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise

    return path

def atomic_write_csv(data: pd.DataFrame, path: Path) -> Path:
    """
    Write a dataframe as CSV (no index) through atomic_write_text.
    """
    return atomic_write_text(path, data.to_csv(index=False, lineterminator="\n"))

def atomic_write_json(payload: dict, path: Path) -> Path:
    """
    Write a JSON document through atomic_write_text.
    """
    return atomic_write_text(path, json.dumps(payload, indent=4, sort_keys=False) + "\n")

def atomic_write_jsonl(records: list, path: Path) -> Path:
    """
    Write one JSON object per line through atomic_write_text.
    """
    lines = [json.dumps(record, sort_keys=False) for record in records]

    return atomic_write_text(path, "".join(line + "\n" for line in lines))

def add_common_arguments(parser, with_config: bool = True):
    """
    Attach the flags every step shares: --config, --seed and --out.
    """
    if with_config:
        parser.add_argument(
            "--config",
            type=str,
            required=True,
            help="Path to the experiment's JSON configuration",
        )

    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Root seed; overrides the configuration's seed",
    )

    parser.add_argument(
        "--out",
        type=str,
        default=DEFAULT_OUTPUT_DIR,
        help=f"Output directory (default: {DEFAULT_OUTPUT_DIR})",
    )

    return parser

def run_command(execute, args) -> int:
    """
    Run a step and turn its failure into an exit status.

    0 on success, 2 for configuration errors, 3 for data errors. The step's
    one-line summary (or the diagnostic) is the last line printed.

    Args:
        execute (callable): The step, taking the parsed arguments and returning its summary line
        args (argparse.Namespace): Parsed arguments

    Returns:
        int: The exit status
    """
    try:
        summary = execute(args)
    except (ConfigError, InvalidArgumentError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (IdxFormatError, InfeasiblePartitionError, FileNotFoundError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA_ERROR

    print(summary)

    return EXIT_SUCCESS
