"""Loading and aggregating experiment result CSVs.

The plots consume only the simulator's results files; nothing here imports
the simulator. Aggregation is the mean over seeds within each group, with
the empty time-to-first-co-location fields contributing nothing (groups
where every run's field is empty disappear from that aggregate).
"""

import pandas as pd


class ResultsError(Exception):
    pass


REQUIRED_COLUMNS = [
    "run_id", "scheduler", "seed", "num_workers", "queue_limit", "intensity",
    "coloc_count", "coloc_probability", "time_to_first_coloc",
    "victim_drop_rate", "victim_p95_latency", "victim_cold_start_rate",
]

SWEEP_COLUMNS = ("intensity", "queue_limit", "num_workers")


def load_results(path, required=REQUIRED_COLUMNS):
    try:
        df = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise ResultsError(f"{path}: no data") from None
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise ResultsError(f"{path}: missing column {missing[0]!r}")
    if df.empty:
        raise ResultsError(f"{path}: no result rows")
    return df


def seed_mean(df, group, columns):
    """Per-group mean over runs; NaN cells (absent values) are skipped and
    all-NaN groups drop out of that column's aggregate."""
    return df.groupby(group, sort=True)[list(columns)].mean()
