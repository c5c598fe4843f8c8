import math
import pandas as pd
import plotly.graph_objects as go

def _summary_frame(records: list, columns: list) -> pd.DataFrame:
    """
    (Internal Helper) One summary row per round record, in the declared column order

    Args:
        records (list): RoundRecord objects
        columns (list): The summary table's columns

    Returns:
        pd.DataFrame: The summary table; a missing beta spread is left empty
    """
    rows = [{column: getattr(record, column) for column in columns} for record in records]
    summary = pd.DataFrame(rows, columns=columns)
    if "beta_spread" in summary.columns:
        summary["beta_spread"] = summary["beta_spread"].astype("float64")

    return summary

def _none_if_nan(value):
    """
    (Internal Helper) Map a float NaN read back from CSV to None
    """
    if isinstance(value, float) and math.isnan(value):
        return None

    return value

def _visualize_accuracy_curve(records: list) -> go.Figure:
    """
    (Internal Helper) Global and regional top-1 per round, with the global steps marked by their aggregator

    Args:
        records (list): RoundRecord objects

    Returns:
        go.Figure: The accuracy curve
    """
    rounds = [record.round for record in records]
    region_count = max(len(record.region_accuracies) for record in records)

    fig = go.Figure()

    fig.update_layout(
        title="Top-1 Accuracy per Communication Round",
        xaxis=dict(
            title="Round",
            gridcolor='lightgrey'
        ),
        yaxis=dict(
            title="Top-1 accuracy",
            range=[0, 1]
        ),
        width=1200,
        height=600,
        template="plotly_white"
    )

    for region in range(region_count):
        accuracies = [
            record.region_accuracies[region] if region < len(record.region_accuracies) else None
            for record in records
        ]
        fig.add_trace(go.Scatter(x=rounds, y=accuracies, name=f'Region {region}', mode='lines', line=dict(dash='dot')))

    fig.add_trace(go.Scatter(x=rounds, y=[record.global_top1 for record in records], name='Global', mode='lines'))

    for aggregator, symbol in (("LKD", "star"), ("FedAvg", "circle")):
        steps = [record for record in records if record.aggregator == aggregator]
        if steps:
            fig.add_trace(go.Scatter(
                x=[record.round for record in steps],
                y=[record.global_top1 for record in steps],
                name=f'{aggregator} step',
                mode='markers',
                marker=dict(symbol=symbol, size=10),
            ))

    return fig
