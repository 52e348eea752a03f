"""Placement policies: Random, DoubleDip, Helper and OpenWhisk.

Each policy maps an arriving invocation to a worker id given only the
read-only platform view (plus its own private random stream in the Random
case). Ties always break toward the lowest worker id so that runs stay
reproducible without the deterministic policies consuming randomness.
"""

import hashlib
import math


def eligible(view, footprint):
    """Workers able to start the footprint immediately (idle holds count as
    used; no eviction is assumed), in ascending id order."""
    return sorted(
        w for w in range(view.num_workers)
        if footprint.fits_within(view.free(w))
    )


def _least_loaded(view, ids):
    best = None
    best_key = None
    for w in ids:
        key = (view.load(w), w)
        if best_key is None or key < best_key:
            best = w
            best_key = key
    return best


class RandomPolicy:
    """Uniform draw over the eligible set; over all workers when none is."""

    name = "random"

    def __init__(self, rng):
        self.rng = rng

    def place(self, inv, view, now):
        ids = view.eligible_ids()
        if ids:
            return ids[self.rng.randrange(len(ids))]
        n = view.num_workers
        if n == 0:
            return None
        return self.rng.randrange(n)


class DoubleDipPolicy:
    """Isolation-first cascade: prefer workers free of other tenants, then
    workers this tenant has not started on recently, then least load. A
    filter that would leave no candidate is skipped.

    When no other-tenant-free worker exists, workers already hosting this
    tenant are preferred over untouched ones: placing there adds no new
    cross-tenant exposure, while spreading a squeezed tenant across the
    cluster would maximize it (and, in contention, re-mix workers that
    other tenants hold exclusively)."""

    name = "doubledip"

    def __init__(self, recency_window):
        self.recency_window = recency_window

    def place(self, inv, view, now):
        if view.num_workers == 0:
            return None
        elig = view.eligible_ids()
        if not elig:
            return _least_loaded(view, range(view.num_workers))
        tenant = inv.tenant
        cand = [w for w in view.other_tenant_free_ids(tenant)
                if view.is_eligible(w)]
        if not cand:
            cand = [w for w in view.tenant_worker_ids(tenant)
                    if view.is_eligible(w)]
        if not cand:
            cand = elig
        window = self.recency_window
        fresh = []
        for w in cand:
            r = view.recency(w, tenant)
            if r is None or now - r >= window:
                fresh.append(w)
        if fresh:
            cand = fresh
        return _least_loaded(view, cand)


class HelperPolicy:
    """Locality-first: a worker already holding an idle container for the
    invoked function wins (least-loaded among those) even when it cannot
    start the invocation right away, in which case the platform queues
    behind the container; with no warm candidate the least-loaded eligible
    worker takes the invocation cold."""

    name = "helper"

    def place(self, inv, view, now):
        if view.num_workers == 0:
            return None
        warm = view.warm_worker_ids(inv.tenant, inv.function)
        if warm:
            return _least_loaded(view, warm)
        elig = view.eligible_ids()
        if not elig:
            return _least_loaded(view, range(view.num_workers))
        return _least_loaded(view, elig)


class OpenWhiskPolicy:
    """Hash each function to a home worker and probe a fixed co-prime stride
    from there; the first eligible worker wins. A fruitless full cycle falls
    back to the home worker, letting the platform queue or drop there."""

    name = "openwhisk"

    def __init__(self, salt):
        self.salt = salt
        self._params = {}
        self._coprimes = None

    def _probe_params(self, tenant, function, n):
        key = (tenant, function)
        cached = self._params.get(key)
        if cached is not None:
            return cached
        raw = hashlib.blake2b(f"{self.salt}:{tenant}:{function}".encode(),
                              digest_size=8).digest()
        digest = int.from_bytes(raw, "big")
        home = digest % n
        if n == 1:
            step = 1
        else:
            if self._coprimes is None:
                self._coprimes = [k for k in range(1, n) if math.gcd(k, n) == 1]
            step = self._coprimes[(digest >> 8) % len(self._coprimes)]
        self._params[key] = (home, step)
        return home, step

    def place(self, inv, view, now):
        n = view.num_workers
        if n == 0:
            return None
        home, step = self._probe_params(inv.tenant, inv.function, n)
        w = home
        for _ in range(n):
            if view.is_eligible(w):
                return w
            w = (w + step) % n
        return home


SCHEDULER_NAMES = ("random", "doubledip", "helper", "openwhisk")


def make_scheduler(name, rng, recency_window, salt):
    """`rng` is the policy-private stream (only Random draws from it); `salt`
    keys OpenWhisk's function-to-home hash so home maps vary across seeds."""
    if name == "random":
        return RandomPolicy(rng)
    if name == "doubledip":
        return DoubleDipPolicy(recency_window)
    if name == "helper":
        return HelperPolicy()
    if name == "openwhisk":
        return OpenWhiskPolicy(salt)
    raise ValueError(f"unknown scheduler {name!r}")
