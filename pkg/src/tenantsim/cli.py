"""Command-line entry point.

`tenantsim run <config>` executes one experiment file; `tenantsim reproduce`
runs the four shipped case-study configs and, when the plotting package is
installed, renders the figures. Exit codes: 0 success, 1 configuration
error, 2 runtime invariant violation.
"""

import argparse
import os
import shutil
import subprocess
import sys
import time
from dataclasses import replace

from .config import ConfigError, parse_config
from .engine import SimulationError
from .platform import InvariantViolation
from .runner import run_experiment, write_csv

CASE_STUDIES = [
    ("case_study_A.cfg", "case_a", None),
    ("case_study_B1.cfg", "sweep", "intensity"),
    ("case_study_B2.cfg", "sweep", "queue_limit"),
    ("case_study_B3.cfg", "sweep", "num_workers"),
]


def load_config(path):
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, name=path)


def default_output(cfg, config_path):
    if cfg.output:
        return cfg.output
    stem = os.path.splitext(os.path.basename(config_path))[0]
    return os.path.join("results", f"{stem}_result.csv")


def run_one_config(config_path, out=None, jobs=1, trace=None, seed_offset=0):
    cfg = load_config(config_path)
    if seed_offset:
        cfg = replace(cfg, seeds=[s + seed_offset for s in cfg.seeds])
    out_path = out or default_output(cfg, config_path)
    started = time.monotonic()
    rows = run_experiment(cfg, out_path, jobs=jobs, trace=trace)
    write_csv(rows, out_path)
    elapsed = time.monotonic() - started
    print(f"{config_path}: {len(rows)} runs in {elapsed:.1f}s -> {out_path}")
    return out_path


def cmd_run(args):
    run_one_config(args.config, out=args.out, jobs=args.jobs,
                   trace=True if args.trace else None,
                   seed_offset=args.seed_offset)
    return 0


def cmd_reproduce(args):
    os.makedirs(args.figs, exist_ok=True)
    outputs = []
    for name, kind, xcol in CASE_STUDIES:
        path = os.path.join(args.configs, name)
        if not os.path.exists(path):
            print(f"error: missing config {path}", file=sys.stderr)
            return 1
        outputs.append((run_one_config(path, jobs=args.jobs), kind, xcol))
    for csv_path, kind, xcol in outputs:
        stem = os.path.splitext(os.path.basename(csv_path))[0]
        fig = os.path.join(args.figs, f"{stem}.png")
        if kind == "case_a":
            cmd, argv = "plot_case_a", [csv_path, fig]
        else:
            cmd, argv = "plot_sweep", [csv_path, xcol, fig]
        exe = shutil.which(cmd)
        if exe is None:
            print(f"plotting component not installed; skipped {fig}")
            continue
        subprocess.run([exe, *argv], check=True)
        print(f"wrote {fig}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="tenantsim",
        description="discrete-event simulator for multi-tenant serverless "
                    "platforms under attacker workloads",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="results CSV path (default: from config)")
    p_run.add_argument("--trace", action="store_true",
                       help="write per-run execution traces")
    p_run.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes")
    p_run.add_argument("--seed-offset", type=int, default=0,
                       help="shift every seed by this amount")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("reproduce",
                           help="run the shipped case studies and plot them")
    p_rep.add_argument("--configs", default="configs")
    p_rep.add_argument("--figs", default="figs")
    p_rep.add_argument("--jobs", type=int, default=1)
    p_rep.set_defaults(func=cmd_reproduce)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SimulationError, InvariantViolation) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
