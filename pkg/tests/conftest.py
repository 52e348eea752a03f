import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from tenantsim.engine import EventEngine, EventKind
from tenantsim.platform import PlatformState, ResourceVector
from tenantsim.workloads import InvocationRecord


def make_platform(num_workers=2, cpu=2.0, mem=2.0, sto=0.0,
                  footprint=(1.0, 1.0, 0.0), idle_timeout=60.0,
                  cold_latency=10.0, queue_limit=2, capacities=None):
    engine = EventEngine()
    if capacities is None:
        capacities = [ResourceVector(cpu, mem, sto)] * num_workers
    platform = PlatformState(
        capacities=capacities,
        footprint=ResourceVector(*footprint),
        idle_timeout=idle_timeout,
        cold_start_latency=cold_latency,
        queue_limit=queue_limit,
        engine=engine,
    )
    return engine, platform


def inv(inv_id, tenant=0, function=0, arrival=0.0, service=5.0, role=None):
    rec = InvocationRecord(inv_id, tenant, function, arrival, service)
    if role is not None:
        rec.role = role
    return rec


def pump(engine, platform, limit=None, log=None):
    """Drive platform-owned events the way the run harness does, without
    scheduler or metrics; returns the dispatch log and the engine report."""
    if log is None:
        log = []

    def dispatch(t, kind, payload):
        log.append((t, kind, payload))
        if kind is EventKind.EXECUTION_START:
            wid, rec, cid, _warm = payload
            platform.start_execution(wid, rec, t)
            engine.schedule(t + rec.service_time, EventKind.COMPLETION,
                            (wid, rec, cid))
        elif kind is EventKind.COMPLETION:
            wid, rec, cid = payload
            platform.complete(wid, rec, cid, t)
        elif kind is EventKind.RECLAIM:
            wid, cid, idled_at = payload
            platform.reclaim(wid, cid, idled_at)
        platform.check_invariants()

    report = engine.run(dispatch, limit=limit)
    return log, report


@pytest.fixture
def tiny_config_text():
    return """
scheduler = random
seeds = 1,2,3
platform.num_workers = 4
platform.queue_limit = 2
platform.cold_start_latency = 5
workload.kind = poisson
workload.rate = 1.0
workload.total = 300
workload.tenants = 6
workload.functions_per_tenant = 2
service.kind = exponential
service.mean = 4.0
attack.enabled = true
attack.intensity = 1.5
attack.victim_tenant = 2
"""
