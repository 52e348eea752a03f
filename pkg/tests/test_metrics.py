import pytest

from tenantsim.metrics import (
    MetricsCollector,
    coloc_probability,
    percentile_nearest_rank,
)
from tenantsim.workloads import Role

from conftest import inv


def victim(i, arrival=0.0):
    return inv(i, tenant=1, arrival=arrival, role=Role.VICTIM)


def attacker(i, arrival=0.0):
    return inv(i, tenant=9, arrival=arrival, role=Role.ATTACKER)


def test_attacker_start_overlapping_victim_counts_once():
    c = MetricsCollector()
    v = victim(0)
    c.on_arrival(v)
    c.on_execution_start(v, worker=3, warm=False, now=1.0)
    a = attacker(1)
    c.on_arrival(a)
    c.on_execution_start(a, worker=3, warm=False, now=2.5)
    assert c.m.coloc_count == 1
    assert c.m.time_to_first_coloc == 2.5
    # a second attacker overlapping the same victim adds no new victim
    a2 = attacker(2)
    c.on_arrival(a2)
    c.on_execution_start(a2, worker=3, warm=True, now=3.0)
    assert c.m.coloc_count == 1
    assert c.m.overlap_events == 2


def test_attacker_on_other_worker_does_not_count():
    c = MetricsCollector()
    v = victim(0)
    c.on_arrival(v)
    c.on_execution_start(v, worker=3, warm=False, now=1.0)
    a = attacker(1)
    c.on_arrival(a)
    c.on_execution_start(a, worker=4, warm=False, now=2.0)
    assert c.m.coloc_count == 0
    assert c.m.time_to_first_coloc is None


def test_completed_victim_no_longer_overlaps():
    # co-location needs concurrent execution; an idle container on the
    # worker is not enough
    c = MetricsCollector()
    v = victim(0)
    c.on_arrival(v)
    c.on_execution_start(v, worker=2, warm=False, now=1.0)
    c.on_terminal(v, True, 2, 5.0)
    a = attacker(1)
    c.on_arrival(a)
    c.on_execution_start(a, worker=2, warm=True, now=6.0)
    assert c.m.coloc_count == 0


def test_victim_starting_next_to_active_attacker_counts():
    c = MetricsCollector()
    a = attacker(0)
    c.on_arrival(a)
    c.on_execution_start(a, worker=1, warm=False, now=1.0)
    v = victim(1)
    c.on_arrival(v)
    c.on_execution_start(v, worker=1, warm=False, now=2.0)
    assert c.m.coloc_count == 1
    assert c.m.time_to_first_coloc == 2.0


def test_terminal_accounting_per_role():
    c = MetricsCollector()
    v = victim(0, arrival=100.0)
    c.on_arrival(v)
    c.on_execution_start(v, worker=0, warm=False, now=120.0)
    c.on_terminal(v, True, 0, 350.0)
    b = inv(1, tenant=5, arrival=10.0)
    c.on_arrival(b)
    c.on_terminal(b, False, 0, 10.0)
    v2 = victim(2, arrival=11.0)
    c.on_arrival(v2)
    c.on_terminal(v2, False, 0, 11.0)
    m = c.finalize()
    assert m.total_arrivals == 3
    assert m.total_drops == 2
    assert m.victim_drops == 1
    assert m.victim_arrivals == 2
    assert m.victim_drop_rate == 0.5
    assert m.victim_mean_latency == 250.0  # 350 - 100


def test_double_terminal_aborts():
    c = MetricsCollector()
    v = victim(0)
    c.on_arrival(v)
    c.on_execution_start(v, worker=0, warm=False, now=1.0)
    c.on_terminal(v, True, 0, 2.0)
    with pytest.raises(RuntimeError):
        c.on_terminal(v, True, 0, 3.0)


def test_percentile_nearest_rank():
    assert percentile_nearest_rank(list(range(1, 101)), 0.95) == 95
    assert percentile_nearest_rank(list(range(1, 21)), 0.95) == 19
    assert percentile_nearest_rank([7.0], 0.95) == 7.0
    assert percentile_nearest_rank([], 0.95) == 0.0


def test_finalize_with_no_victim_latencies():
    c = MetricsCollector()
    v = victim(0)
    c.on_arrival(v)
    c.on_terminal(v, False, 0, 0.0)
    m = c.finalize()
    assert m.victim_mean_latency == 0.0
    assert m.victim_p95_latency == 0.0
    assert m.victim_latency_defined is False


def test_coloc_probability_cases():
    c = MetricsCollector()
    m = c.finalize()
    assert coloc_probability(m) == 0.0   # no victim arrivals -> flagged 0

    m.victim_arrivals = 100
    m.coloc_count = 0
    assert coloc_probability(m) == 0.0
    m.coloc_count = 25
    assert coloc_probability(m) == 0.25
    m.coloc_count = 100
    assert coloc_probability(m) == 1.0


def test_cold_warm_counters_split_by_start_kind():
    c = MetricsCollector()
    for i, warm in enumerate([False, True, True, False]):
        rec = victim(i)
        c.on_arrival(rec)
        c.on_execution_start(rec, worker=0, warm=warm, now=float(i))
        c.on_terminal(rec, True, 0, float(i) + 1.0)
    m = c.finalize()
    assert m.cold_starts == 2
    assert m.warm_starts == 2
    assert m.victim_cold_start_rate == 0.5
