"""Four-panel co-location figure: per-scheduler co-location probability,
victim cold-start rate, their tradeoff, and mean time to first co-location
(schedulers that never observe co-location are left out of that panel)."""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import ResultsError, load_results, seed_mean


def build_figure(df):
    means = seed_mean(df, "scheduler",
                      ["coloc_probability", "victim_cold_start_rate"])
    # time to first co-location averages only the runs that observed one;
    # schedulers with no such run are omitted from panel (d)
    ttfc = seed_mean(df, "scheduler", ["time_to_first_coloc"])
    ttfc = ttfc.dropna(subset=["time_to_first_coloc"])

    fig, axes = plt.subplots(1, 4, figsize=(16, 3.6))
    (ax_prob, ax_cold, ax_trade, ax_ttfc) = axes

    schedulers = list(means.index)
    ax_prob.bar(schedulers, means["coloc_probability"], color="#c0504d")
    ax_prob.set_ylabel("co-location probability")
    ax_prob.set_title("(a) co-location per victim invocation")

    ax_cold.bar(schedulers, means["victim_cold_start_rate"], color="#4f81bd")
    ax_cold.set_ylabel("victim cold-start rate")
    ax_cold.set_title("(b) victim cold starts")

    for sched in schedulers:
        ax_trade.scatter(means.loc[sched, "coloc_probability"],
                         means.loc[sched, "victim_cold_start_rate"],
                         label=sched, s=60)
    ax_trade.set_xlabel("co-location probability")
    ax_trade.set_ylabel("victim cold-start rate")
    ax_trade.set_title("(c) isolation vs cold starts")
    ax_trade.legend(fontsize=8)

    if len(ttfc):
        values = ttfc["time_to_first_coloc"]
        ax_ttfc.bar(list(ttfc.index), values, color="#9bbb59")
        positive = values[values > 0]
        if len(positive) and positive.max() / positive.min() >= 100:
            ax_ttfc.set_yscale("log")   # spans >= 2 decades
    ax_ttfc.set_ylabel("time to first co-location")
    ax_ttfc.set_title("(d) attack feasibility")

    for ax in axes:
        ax.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    return fig, means, ttfc


def plot_case_a(csv_path, out_path):
    df = load_results(csv_path)
    fig, means, ttfc = build_figure(df)
    fig.savefig(out_path, dpi=140)
    plt.close(fig)
    return means, ttfc


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="plot_case_a",
        description="render the co-location case-study figure from a results CSV")
    parser.add_argument("csv")
    parser.add_argument("out")
    args = parser.parse_args(argv)
    try:
        plot_case_a(args.csv, args.out)
    except (ResultsError, FileNotFoundError) as exc:
        print(f"plot_case_a: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
