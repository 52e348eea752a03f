"""Sweep figures: seed-averaged victim drop rate and p95 latency against a
swept dimension (attack intensity, queue limit, or cluster size), one line
per scheduler."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

from .io import SWEEP_COLUMNS, ResultsError, load_results, seed_mean


def build_figure(df, x_column):
    if x_column not in SWEEP_COLUMNS:
        raise ResultsError(
            f"x column must be one of {', '.join(SWEEP_COLUMNS)}, got {x_column!r}")
    if not pd.api.types.is_numeric_dtype(df[x_column]):
        raise ResultsError(f"column {x_column!r} is not numeric")

    fig, (ax_drop, ax_p95) = plt.subplots(1, 2, figsize=(9.5, 3.6))
    aggregates = {}
    for sched, group in df.groupby("scheduler", sort=True):
        means = seed_mean(group, x_column,
                          ["victim_drop_rate", "victim_p95_latency"])
        aggregates[sched] = means
        ax_drop.plot(means.index, means["victim_drop_rate"],
                     marker="o", label=sched)
        ax_p95.plot(means.index, means["victim_p95_latency"],
                    marker="o", label=sched)
    ax_drop.set_xlabel(x_column)
    ax_drop.set_ylabel("victim drop rate")
    ax_p95.set_xlabel(x_column)
    ax_p95.set_ylabel("victim p95 latency")
    if len(df["scheduler"].unique()) > 1:
        ax_drop.legend(fontsize=8)
        ax_p95.legend(fontsize=8)
    fig.tight_layout()
    return fig, aggregates


def plot_sweep(csv_path, x_column, out_path):
    df = load_results(csv_path)
    fig, aggregates = build_figure(df, x_column)
    fig.savefig(out_path, dpi=140)
    plt.close(fig)
    return aggregates


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot_sweep",
        description="render a sweep figure (drop rate and p95 latency vs a "
                    "swept dimension) from a results CSV")
    parser.add_argument("csv")
    parser.add_argument("x_column")
    parser.add_argument("out")
    args = parser.parse_args(argv)
    try:
        plot_sweep(args.csv, args.x_column, args.out)
    except (ResultsError, FileNotFoundError) as exc:
        print(f"plot_sweep: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
