"""Run execution: wires engine, platform, scheduler, workload and metrics
together for one run, executes sweeps (optionally in parallel) and writes
the results CSV.

Every run derives its component random streams from (seed, label) so that
changing the scheduler or the attacker cannot perturb benign arrivals.
"""

import csv
import hashlib
import math
import multiprocessing
import os
import random

from .adversary import AttackedWorkload
from .config import expand, resolve
from .engine import EventEngine, EventKind, SimulationError
from .metrics import MetricsCollector, TraceWriter, coloc_probability
from .platform import PlacementOutcome, PlatformState
from .schedulers import make_scheduler
from .workloads import ArrivalGenerator

STREAM_LABELS = ("workload", "attacker", "scheduler", "service")

_ARRIVAL = EventKind.ARRIVAL
_EXECUTION_START = EventKind.EXECUTION_START
_COMPLETION = EventKind.COMPLETION
_DROPPED = PlacementOutcome.DROPPED

CSV_COLUMNS = [
    "run_id", "scheduler", "seed", "num_workers", "queue_limit", "intensity",
    "cold_starts", "warm_starts", "coloc_count", "coloc_probability",
    "time_to_first_coloc", "total_arrivals", "total_drops",
    "victim_arrivals", "victim_drops", "victim_drop_rate",
    "victim_mean_latency", "victim_p95_latency", "victim_cold_start_rate",
    "attacker_arrivals", "attacker_drops", "attacker_drop_rate",
]


def derive_rng(seed, label):
    """Independent stream for one component of one run; mixing the label in
    through a hash keeps streams decoupled however much each one consumes."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


class Simulation:
    """One deterministic run of a resolved configuration."""

    def __init__(self, params, tracer=None, validate=False):
        self.params = params
        self.tracer = tracer
        self.validate = validate
        self.engine = EventEngine()
        self.platform = PlatformState(
            capacities=params.capacities,
            footprint=params.footprint,
            idle_timeout=params.idle_timeout,
            cold_start_latency=params.cold_start_latency,
            queue_limit=params.queue_limit,
            engine=self.engine,
        )
        self.view = self.platform.view()
        self.scheduler = make_scheduler(
            params.scheduler,
            rng=derive_rng(params.seed, "scheduler"),
            recency_window=params.recency_window,
            salt=params.seed,
        )
        benign = ArrivalGenerator(
            params.workload,
            derive_rng(params.seed, "workload"),
            params.service,
            derive_rng(params.seed, "service"),
        )
        if params.attack is not None:
            self.source = AttackedWorkload(
                benign, params.attack, derive_rng(params.seed, "attacker"))
        else:
            self.source = benign
        self.metrics = MetricsCollector()
        self._outstanding = 0

    def _schedule_next_batch(self):
        batch = self.source.next_batch()
        for rec in batch:
            self.engine.schedule(rec.arrival, _ARRIVAL, rec)
        self._outstanding = len(batch)

    def _dispatch(self, time, kind, payload):
        if kind is _ARRIVAL:
            inv = payload
            self.metrics.on_arrival(inv)
            wid = self.scheduler.place(inv, self.view, time)
            if wid is None:
                raise SimulationError("scheduler returned failure: no workers")
            outcome = self.platform.admit(wid, inv)
            if self.tracer:
                self.tracer.arrival(time, inv, wid, outcome)
            if outcome is _DROPPED:
                self.metrics.on_terminal(inv, False, wid, time)
            self._outstanding -= 1
            if self._outstanding == 0:
                self._schedule_next_batch()
        elif kind is _EXECUTION_START:
            wid, inv, cid, warm = payload
            self.platform.start_execution(wid, inv, time)
            self.engine.schedule(time + inv.service_time, _COMPLETION,
                                 (wid, inv, cid))
            self.metrics.on_execution_start(inv, wid, warm, time)
            if self.tracer:
                self.tracer.start(time, inv, wid, warm)
        elif kind is _COMPLETION:
            wid, inv, cid = payload
            self.platform.complete(wid, inv, cid, time)
            self.metrics.on_terminal(inv, True, wid, time)
            if self.tracer:
                self.tracer.completion(time, inv, wid)
        else:
            wid, cid, idled_at = payload
            reclaimed = self.platform.reclaim(wid, cid, idled_at)
            if self.tracer:
                self.tracer.reclaim(time, wid, reclaimed)
        if self.validate:
            self.platform.check_invariants()

    def run(self, limit=None):
        tenant, function, count = self.params.prewarm
        if count > 0:
            shortfall = self.platform.prewarm(tenant, function, count)
            if shortfall and self.tracer:
                self.tracer.comment(f"prewarm_shortfall {shortfall}")
        self._schedule_next_batch()
        report = self.engine.run(self._dispatch, limit=limit)
        if report.drained and self.platform.in_flight != 0:
            raise SimulationError(
                f"drained with {self.platform.in_flight} invocations in flight")
        metrics = self.metrics.finalize()
        if self.tracer:
            self.tracer.close(metrics)
        return metrics, report


def execute(cfg, spec, trace_path=None, validate=False):
    """Build and run one RunSpec; returns (RunMetrics, SimReport)."""
    params = resolve(cfg, spec)
    tracer = TraceWriter(trace_path) if trace_path else None
    sim = Simulation(params, tracer=tracer, validate=validate)
    try:
        return sim.run()
    except Exception as exc:
        raise SimulationError(
            f"run {spec.ordinal} (scheduler={spec.scheduler}, seed={spec.seed}) "
            f"failed: {exc}"
        ) from exc


def metrics_row(cfg, spec, metrics):
    params = resolve(cfg, spec)
    return {
        "run_id": spec.ordinal,
        "scheduler": spec.scheduler,
        "seed": spec.seed,
        "num_workers": params.num_workers,
        "queue_limit": params.queue_limit,
        "intensity": params.attack.intensity if params.attack else 0.0,
        "cold_starts": metrics.cold_starts,
        "warm_starts": metrics.warm_starts,
        "coloc_count": metrics.coloc_count,
        "coloc_probability": coloc_probability(metrics),
        "time_to_first_coloc": metrics.time_to_first_coloc,
        "total_arrivals": metrics.total_arrivals,
        "total_drops": metrics.total_drops,
        "victim_arrivals": metrics.victim_arrivals,
        "victim_drops": metrics.victim_drops,
        "victim_drop_rate": metrics.victim_drop_rate,
        "victim_mean_latency": metrics.victim_mean_latency,
        "victim_p95_latency": metrics.victim_p95_latency,
        "victim_cold_start_rate": metrics.victim_cold_start_rate,
        "attacker_arrivals": metrics.attacker_arrivals,
        "attacker_drops": metrics.attacker_drops,
        "attacker_drop_rate": metrics.attacker_drop_rate,
    }


def trace_file_path(out_path, ordinal):
    stem, _ext = os.path.splitext(out_path)
    return f"{stem}_traces/run{ordinal:05d}.trace"


def _run_one(args):
    cfg, spec, trace_path = args
    metrics, _report = execute(cfg, spec, trace_path=trace_path)
    return metrics_row(cfg, spec, metrics)


def run_experiment(cfg, out_path, jobs=1, trace=None):
    """Execute every run of the sweep and return rows in ordinal order. Rows
    are identical whether executed serially or across `jobs` processes."""
    specs = expand(cfg)
    tracing = cfg.trace if trace is None else trace
    if tracing:
        os.makedirs(os.path.dirname(trace_file_path(out_path, 0)) or ".",
                    exist_ok=True)
    tasks = [
        (cfg, spec, trace_file_path(out_path, spec.ordinal) if tracing else None)
        for spec in specs
    ]
    if jobs > 1 and len(tasks) > 1:
        with multiprocessing.Pool(jobs) as pool:
            rows = pool.map(_run_one, tasks)
    else:
        rows = [_run_one(t) for t in tasks]
    return rows


def format_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6g}"
    return str(value)


def write_csv(rows, path):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([format_cell(row[col]) for col in CSV_COLUMNS])
