"""Metrics collection: a pure observer of engine events.

The collector keeps its own picture of what executes where, built solely
from the event callbacks, so measurement can never influence scheduling or
execution. Co-location is detected at execution-start boundaries: two
executions overlap on a worker if and only if one starts while the other
is active.
"""

import math
from dataclasses import dataclass
from typing import Optional

from .workloads import Role

_VICTIM = Role.VICTIM
_ATTACKER = Role.ATTACKER


@dataclass
class RunMetrics:
    cold_starts: int = 0
    warm_starts: int = 0
    coloc_count: int = 0
    time_to_first_coloc: Optional[float] = None
    total_arrivals: int = 0
    total_drops: int = 0
    total_completions: int = 0
    victim_arrivals: int = 0
    victim_drops: int = 0
    victim_drop_rate: float = 0.0
    victim_mean_latency: float = 0.0
    victim_p95_latency: float = 0.0
    victim_cold_starts: int = 0
    victim_starts: int = 0
    victim_cold_start_rate: float = 0.0
    victim_completions: int = 0
    attacker_arrivals: int = 0
    attacker_drops: int = 0
    attacker_drop_rate: float = 0.0
    attacker_completions: int = 0
    overlap_events: int = 0
    # set False when the victim completed nothing, so the zero latency
    # figures are recognizable as undefined rather than measured
    victim_latency_defined: bool = True


def coloc_probability(metrics):
    """Fraction of victim invocations that ever overlapped an attacker
    execution on their worker; 0 when there were no victim arrivals."""
    if metrics.victim_arrivals == 0:
        return 0.0
    return metrics.coloc_count / metrics.victim_arrivals


def percentile_nearest_rank(sorted_values, fraction):
    """Nearest-rank percentile: element at 1-based index ceil(fraction*n)."""
    n = len(sorted_values)
    if n == 0:
        return 0.0
    rank = math.ceil(fraction * n)
    return sorted_values[max(rank, 1) - 1]


class MetricsCollector:
    def __init__(self):
        self.m = RunMetrics()
        self._terminal = set()
        self._active_victims = {}     # worker -> {invocation id}
        self._active_attackers = {}   # worker -> count of attacker executions
        self._coloc_victims = set()
        self._victim_latencies = []

    def on_arrival(self, inv):
        m = self.m
        m.total_arrivals += 1
        if inv.role is _VICTIM:
            m.victim_arrivals += 1
        elif inv.role is _ATTACKER:
            m.attacker_arrivals += 1

    def on_execution_start(self, inv, worker, warm, now):
        m = self.m
        if warm:
            m.warm_starts += 1
        else:
            m.cold_starts += 1
        role = inv.role
        if role is _VICTIM:
            m.victim_starts += 1
            if not warm:
                m.victim_cold_starts += 1
            if self._active_attackers.get(worker, 0):
                self._mark_coloc(inv.id, self._active_attackers[worker], now)
            self._active_victims.setdefault(worker, set()).add(inv.id)
        elif role is _ATTACKER:
            victims = self._active_victims.get(worker)
            if victims:
                for vid in victims:
                    self._mark_coloc(vid, 1, now)
            self._active_attackers[worker] = self._active_attackers.get(worker, 0) + 1

    def _mark_coloc(self, victim_id, pairs, now):
        m = self.m
        m.overlap_events += pairs
        if victim_id not in self._coloc_victims:
            self._coloc_victims.add(victim_id)
            m.coloc_count += 1
            if m.time_to_first_coloc is None:
                m.time_to_first_coloc = now

    def on_terminal(self, inv, completed, worker, now):
        """Record an invocation's single terminal event (completion or drop)."""
        if inv.id in self._terminal:
            raise RuntimeError(f"invocation {inv.id} reached a terminal state twice")
        self._terminal.add(inv.id)
        m = self.m
        role = inv.role
        if completed:
            m.total_completions += 1
            if role is _VICTIM:
                m.victim_completions += 1
                self._victim_latencies.append(now - inv.arrival)
                self._active_victims[worker].discard(inv.id)
            elif role is _ATTACKER:
                m.attacker_completions += 1
                self._active_attackers[worker] -= 1
        else:
            m.total_drops += 1
            if role is _VICTIM:
                m.victim_drops += 1
            elif role is _ATTACKER:
                m.attacker_drops += 1

    def finalize(self):
        m = self.m
        if m.victim_arrivals:
            m.victim_drop_rate = m.victim_drops / m.victim_arrivals
        if m.attacker_arrivals:
            m.attacker_drop_rate = m.attacker_drops / m.attacker_arrivals
        if m.victim_starts:
            m.victim_cold_start_rate = m.victim_cold_starts / m.victim_starts
        lat = self._victim_latencies
        if lat:
            m.victim_mean_latency = sum(lat) / len(lat)
            m.victim_p95_latency = percentile_nearest_rank(sorted(lat), 0.95)
        else:
            m.victim_latency_defined = False
        return m


class TraceWriter:
    """Line-delimited per-run trace. Times use repr() so a replay recovers
    the exact float values; summary counters go into trailing comments."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w")
        self._fh.write("# time,kind,invocation,worker,outcome,role\n")

    def record(self, time, kind, inv_id, worker, outcome, role):
        self._fh.write(
            f"{time!r},{kind},{'' if inv_id is None else inv_id},"
            f"{'' if worker is None else worker},{outcome},{role}\n"
        )

    def arrival(self, time, inv, worker, outcome):
        self.record(time, "arrival", inv.id, worker, outcome.value, inv.role.value)

    def start(self, time, inv, worker, warm):
        self.record(time, "start", inv.id, worker,
                    "warm" if warm else "cold", inv.role.value)

    def completion(self, time, inv, worker):
        self.record(time, "completion", inv.id, worker, "completed", inv.role.value)

    def reclaim(self, time, worker, reclaimed):
        self.record(time, "reclaim", None, worker,
                    "reclaimed" if reclaimed else "stale", "")

    def comment(self, text):
        self._fh.write(f"# {text}\n")

    def close(self, metrics=None):
        if metrics is not None:
            self.comment(f"overlap_events {metrics.overlap_events}")
        self._fh.close()
