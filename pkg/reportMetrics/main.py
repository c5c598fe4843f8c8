import json
import numpy as np
import pandas as pd
from pathlib import Path
from sklearn.metrics import confusion_matrix as sklearn_confusion_matrix

from utils.errors import InvalidArgumentError
from utils.pipeline import get_report_columns, atomic_write_csv, atomic_write_jsonl, atomic_write_text
from trainNetworks.main import predict
from runFederation.runlog import RoundRecord, RunLog
from reportMetrics.helper import _summary_frame, _none_if_nan, _visualize_accuracy_curve

def confusion_matrix(model, ds) -> np.ndarray:
    """
    C x C counts of (true class, predicted class) pairs; rows are true classes.

    Raises:
        InvalidArgumentError: If the dataset is empty
    """
    if ds.size == 0:
        raise InvalidArgumentError("cannot evaluate on an empty dataset")

    return sklearn_confusion_matrix(ds.labels, predict(model, ds.features), labels=np.arange(ds.class_count))

def top1_accuracy(matrix: np.ndarray) -> float:
    """
    Trace over total of a confusion matrix.
    """
    return float(np.trace(matrix) / np.sum(matrix))

def per_class_accuracy(matrix: np.ndarray) -> np.ndarray:
    """
    Diagonal over row sums; classes absent from the evaluation set are NaN.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    row_sums = matrix.sum(axis=1)

    with np.errstate(invalid="ignore", divide="ignore"):
        accuracy = np.diag(matrix) / row_sums

    return np.where(row_sums > 0, accuracy, np.nan)

def write_confusion_csv(matrix: np.ndarray, path: str) -> Path:
    """
    Write a confusion matrix as CSV: a true_class column followed by pred_0 .. pred_{C-1}.
    """
    prefix = get_report_columns("confusion")
    table = pd.DataFrame(matrix, columns=[f"pred_{c}" for c in range(matrix.shape[1])])
    table.insert(0, prefix[0], np.arange(matrix.shape[0]))

    return atomic_write_csv(table, Path(path))

def write_runlog(runlog: RunLog, output_dir: str) -> (Path, Path):
    """
    Persist a run as runlog.jsonl (one record per round) and summary.csv.

    Returns:
        tuple: (runlog path, summary path)
    """
    output_dir = Path(output_dir)
    records = [record.to_dict() for record in runlog.records]
    runlog_path = atomic_write_jsonl(records, output_dir / "runlog.jsonl")
    summary_path = atomic_write_csv(_summary_frame(runlog.records, get_report_columns("summary")), output_dir / "summary.csv")

    return runlog_path, summary_path

def read_runlog(path: str) -> RunLog:
    """
    Read a runlog.jsonl back into a RunLog (models are not persisted).
    """
    runlog = RunLog()
    with open(Path(path), "r") as f:
        for line in f:
            if line.strip():
                runlog.append(RoundRecord.from_dict(json.loads(line)))

    return runlog

def read_summary_csv(path: str) -> list:
    """
    Read summary.csv as a list of dicts keyed by the declared columns, empty cells as None.
    """
    columns = get_report_columns("summary")
    summary = pd.read_csv(Path(path), keep_default_na=False, na_values=[""], float_precision="round_trip")
    if list(summary.columns) != columns:
        raise InvalidArgumentError(f"{path}: columns {list(summary.columns)} differ from {columns}")

    rows = []
    for row in summary.to_dict(orient="records"):
        rows.append({
            "round": int(row["round"]),
            "global_top1": float(row["global_top1"]),
            "aggregator": str(row["aggregator"]),
            "beta_spread": _none_if_nan(float(row["beta_spread"])),
            "seconds_global_step": float(row["seconds_global_step"]),
        })

    return rows

def summary_rows(runlog: RunLog) -> list:
    """
    The in-memory counterpart of read_summary_csv.
    """
    columns = get_report_columns("summary")

    return [{column: getattr(record, column) for column in columns} for record in runlog.records]

def per_class_table(runlog: RunLog) -> pd.DataFrame:
    """
    Long table of the global model's per-class accuracy: one row per (round, class).
    """
    columns = get_report_columns("per_class")
    rows = [
        dict(zip(columns, (record.round, c, accuracy)))
        for record in runlog.records
        for c, accuracy in enumerate(record.per_class_accuracy)
    ]

    return pd.DataFrame(rows, columns=columns)

def build_report(run_dir: str, output_dir: str = None) -> dict:
    """
    Re-read a finished run, check the JSON-lines log against the summary table, and write
    accuracy_curve.html and per_class_accuracy.csv.

    Args:
        run_dir (str): Folder holding runlog.jsonl and summary.csv
        output_dir (str, optional): Where the report goes; defaults to run_dir

    Returns:
        dict: {'rounds', 'final_global_top1', 'lkd_steps', 'fedavg_steps', 'files'}

    Raises:
        InvalidArgumentError: If the two files disagree
        FileNotFoundError: If either file is missing
    """
    run_dir = Path(run_dir)
    output_dir = Path(output_dir) if output_dir is not None else run_dir

    runlog = read_runlog(run_dir / "runlog.jsonl")
    if len(runlog.records) == 0:
        raise InvalidArgumentError(f"{run_dir / 'runlog.jsonl'} holds no rounds")
    if read_summary_csv(run_dir / "summary.csv") != summary_rows(runlog):
        raise InvalidArgumentError(f"{run_dir}: summary.csv does not match runlog.jsonl")

    figure = _visualize_accuracy_curve(runlog.records)
    html_path = atomic_write_text(output_dir / "accuracy_curve.html", figure.to_html(include_plotlyjs="cdn", div_id="accuracy_curve"))
    per_class_path = atomic_write_csv(per_class_table(runlog), output_dir / "per_class_accuracy.csv")

    return {
        "rounds": len(runlog.records),
        "final_global_top1": runlog.records[-1].global_top1,
        "lkd_steps": runlog.aggregators.count("LKD"),
        "fedavg_steps": runlog.aggregators.count("FedAvg"),
        "files": [str(html_path), str(per_class_path)],
    }
