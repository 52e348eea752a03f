"""Attacker modeling: wraps a benign workload, labels the victim tenant and
injects attacker invocations at a rate coupled to the victim's arrival rate.

The attacker is an independent arrival process (not literally k records per
victim arrival), which supports fractional intensities and keeps the benign
stream untouched: stripping attacker records from the wrapped stream recovers
the benign stream exactly, timestamps and service times included.
"""

from dataclasses import dataclass
from typing import Optional

from .workloads import (
    ArrivalGenerator,
    Role,
    ServiceTimeSpec,
    WorkloadSpec,
    BURSTY,
    POISSON,
    UNIFORM,
    mean_rate,
)

ATTACK_FUNCTION = 0  # attackers invoke a single dedicated function


@dataclass(frozen=True)
class AttackSpec:
    attacker_tenant: int
    intensity: float
    victim_tenant: int
    pattern: str = POISSON
    victim_functions: Optional[frozenset] = None   # None = every victim function
    service: ServiceTimeSpec = ServiceTimeSpec()


def victim_rate(benign_spec, victim_tenant):
    """Long-run arrival rate of one tenant under even tenant sampling."""
    if not 0 <= victim_tenant < benign_spec.tenants:
        raise ValueError(f"victim tenant {victim_tenant} out of range")
    return mean_rate(benign_spec) / benign_spec.tenants


def _attacker_workload_spec(benign_spec, attack, rate):
    """Arrival spec for the attacker stream at the coupled mean rate."""
    if attack.pattern == POISSON:
        extra = {"rate": rate}
    elif attack.pattern == UNIFORM:
        extra = {"interval": 1.0 / rate}
    elif attack.pattern == BURSTY:
        if benign_spec.kind == BURSTY:
            lo, hi, phase = (benign_spec.low_rate, benign_spec.high_rate,
                             benign_spec.phase_length)
        else:
            lo, hi, phase = 1.0, 10.0, 100.0
        scale = 2.0 * rate / (lo + hi)
        extra = {"low_rate": lo * scale, "high_rate": hi * scale,
                 "phase_length": phase}
    else:
        raise ValueError(f"unknown attack pattern {attack.pattern!r}")
    return WorkloadSpec(
        kind=attack.pattern,
        tenants=1,
        functions_per_tenant=1,
        total_invocations=2 ** 62,   # truncated by the benign stream's end
        **extra,
    )


class AttackedWorkload:
    """Merges the benign stream (victim records re-labeled) with the attacker
    stream by timestamp. Attacker arrivals never extend past the benign run."""

    def __init__(self, base, attack, rng):
        self.base = base
        self.attack = attack
        rate = attack.intensity * victim_rate(base.spec, attack.victim_tenant)
        self._attacker = None
        if rate > 0:
            self._attacker = ArrivalGenerator(
                _attacker_workload_spec(base.spec, attack, rate),
                rng,
                attack.service,
                rng,
                start_id=base.spec.total_invocations,
            )
        self._benign_buf = []
        self._benign_done = False
        self._pending_attack = None

    def _label(self, rec):
        a = self.attack
        if rec.tenant == a.victim_tenant and (
                a.victim_functions is None or rec.function in a.victim_functions):
            rec.role = Role.VICTIM
        return rec

    def _next_benign(self):
        if not self._benign_buf and not self._benign_done:
            batch = self.base.next_batch()
            if batch:
                self._benign_buf = list(reversed(batch))
            else:
                self._benign_done = True
        return self._benign_buf[-1] if self._benign_buf else None

    def _next_attack(self):
        if self._pending_attack is None and self._attacker is not None:
            batch = self._attacker.next_batch(1)
            if batch:
                rec = batch[0]
                rec.tenant = self.attack.attacker_tenant
                rec.function = ATTACK_FUNCTION
                rec.role = Role.ATTACKER
                self._pending_attack = rec
        return self._pending_attack

    def next_batch(self, count=None):
        if count is None:
            count = self.base.spec.batch_size
        out = []
        while len(out) < count:
            ben = self._next_benign()
            if ben is None:
                break
            att = self._next_attack()
            if att is not None and att.arrival <= ben.arrival:
                out.append(att)
                self._pending_attack = None
            else:
                out.append(self._label(self._benign_buf.pop()))
        return out
