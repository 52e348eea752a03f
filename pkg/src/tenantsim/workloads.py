"""Benign workload generation: arrival processes and service-time sampling.

Generators emit timestamped invocation records in batches and embed no
placement assumptions. Arrival timing, tenant/function sampling and service
times each draw from streams owned by the caller, so the benign trace for a
seed is identical no matter which scheduler or attacker runs against it.
"""

from dataclasses import dataclass, field
from enum import Enum


class Role(Enum):
    BENIGN = "benign"
    VICTIM = "victim"
    ATTACKER = "attacker"


UNIFORM = "uniform"
POISSON = "poisson"
BURSTY = "bursty"

FIXED = "fixed"
EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class ServiceTimeSpec:
    kind: str = FIXED
    mean: float = 100.0


def sample_service_time(spec, rng):
    if spec.kind == FIXED:
        return spec.mean
    if spec.kind == EXPONENTIAL:
        return rng.expovariate(1.0 / spec.mean)
    raise ValueError(f"unknown service-time kind {spec.kind!r}")


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str
    tenants: int
    functions_per_tenant: int
    total_invocations: int
    rate: float = 1.0              # poisson arrivals per time unit
    interval: float = 1.0          # uniform spacing
    low_rate: float = 0.1          # bursty
    high_rate: float = 1.0
    phase_length: float = 100.0
    batch_size: int = 1000


@dataclass(slots=True)
class InvocationRecord:
    id: int
    tenant: int
    function: int
    arrival: float
    service_time: float
    role: Role = field(default=Role.BENIGN)


def mean_rate(spec):
    """Long-run arrivals per time unit of the configured process."""
    if spec.kind == UNIFORM:
        return 1.0 / spec.interval
    if spec.kind == POISSON:
        return spec.rate
    if spec.kind == BURSTY:
        # low and high phases have equal length, so the time average is the
        # midpoint of the two rates
        return (spec.low_rate + spec.high_rate) / 2.0
    raise ValueError(f"unknown workload kind {spec.kind!r}")


class ArrivalGenerator:
    """Pull-based benign generator; exhausts after total_invocations records."""

    def __init__(self, spec, rng, service_spec, service_rng, start_id=0):
        self.spec = spec
        self.rng = rng
        self.service_spec = service_spec
        self.service_rng = service_rng
        self.emitted = 0
        self.now = 0.0
        self._next_id = start_id

    def _advance(self):
        spec = self.spec
        if spec.kind == UNIFORM:
            self.now += spec.interval
        elif spec.kind == POISSON:
            self.now += self.rng.expovariate(spec.rate)
        elif spec.kind == BURSTY:
            self.now = self._advance_bursty()
        else:
            raise ValueError(f"unknown workload kind {spec.kind!r}")
        return self.now

    def _advance_bursty(self):
        # Piecewise-constant-rate Poisson process: spend a unit-rate
        # exponential across phases, scaling time by the phase rate.
        spec = self.spec
        t = self.now
        work = self.rng.expovariate(1.0)
        while True:
            phase = int(t // spec.phase_length)
            rate = spec.low_rate if phase % 2 == 0 else spec.high_rate
            boundary = (phase + 1) * spec.phase_length
            capacity = (boundary - t) * rate
            if work <= capacity:
                return t + work / rate
            work -= capacity
            t = boundary

    def next_batch(self, count=None):
        """Next `count` arrivals (a full batch by default); empty when done."""
        spec = self.spec
        if count is None:
            count = spec.batch_size
        n = min(count, spec.total_invocations - self.emitted)
        out = []
        for _ in range(n):
            t = self._advance()
            tenant = self.rng.randrange(spec.tenants)
            function = self.rng.randrange(spec.functions_per_tenant)
            service = sample_service_time(self.service_spec, self.service_rng)
            out.append(InvocationRecord(self._next_id, tenant, function, t, service))
            self._next_id += 1
        self.emitted += n
        return out
