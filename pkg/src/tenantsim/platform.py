"""Platform state: workers, containers, resource accounting and backpressure.

Resources are charged when an execution is admitted and released at
completion, except that an idle container keeps holding its memory and
storage until it is reclaimed (idle timeout), reused (warm start) or
evicted to make room for a cold start. Each worker keeps a bounded FIFO
queue; arrivals that fit neither capacity nor queue are dropped.
"""

from collections import deque
from dataclasses import dataclass
from enum import Enum

from .engine import EventKind

_EXECUTION_START = EventKind.EXECUTION_START
_RECLAIM = EventKind.RECLAIM


class InvariantViolation(RuntimeError):
    """Internal platform bookkeeping went inconsistent; the run must abort."""


@dataclass(frozen=True)
class ResourceVector:
    cpu: float = 0.0
    memory: float = 0.0
    storage: float = 0.0

    def fits_within(self, other):
        return (
            self.cpu <= other.cpu
            and self.memory <= other.memory
            and self.storage <= other.storage
        )


class PlacementOutcome(Enum):
    STARTED_WARM = "warm"
    STARTED_COLD = "cold"
    ENQUEUED = "enqueued"
    DROPPED = "dropped"


class ContainerState(Enum):
    ACTIVE = 0
    IDLE = 1


class Container:
    __slots__ = ("cid", "tenant", "function", "worker_id", "state", "last_used",
                 "hold_mem", "hold_sto")

    def __init__(self, cid, tenant, function, worker_id, state, last_used,
                 hold_mem, hold_sto):
        self.cid = cid
        self.tenant = tenant
        self.function = function
        self.worker_id = worker_id
        self.state = state
        self.last_used = last_used
        # memory/storage kept while idle; idle containers hold no CPU
        self.hold_mem = hold_mem
        self.hold_sto = hold_sto


class Worker:
    __slots__ = ("wid", "cap_cpu", "cap_mem", "cap_sto", "free_cpu", "free_mem",
                 "free_sto", "nrunning", "executing", "queue", "containers",
                 "idle_by_fn", "tenant_counts", "ncontainers", "recency")

    def __init__(self, wid, capacity):
        self.wid = wid
        self.cap_cpu = capacity.cpu
        self.cap_mem = capacity.memory
        self.cap_sto = capacity.storage
        self.free_cpu = capacity.cpu
        self.free_mem = capacity.memory
        self.free_sto = capacity.storage
        self.nrunning = 0            # admitted and not yet completed
        self.executing = set()       # invocation ids past their start event
        self.queue = deque()
        self.containers = {}         # cid -> Container (all states)
        self.idle_by_fn = {}         # (tenant, function) -> [cid, ...] in idle order
        self.tenant_counts = {}      # tenant -> container count (any state)
        self.ncontainers = 0
        self.recency = {}            # tenant -> last execution-start time here

    def load(self):
        return self.nrunning + len(self.queue)


class PlatformView:
    """Read-only window the scheduler is given; never mutates platform state."""

    def __init__(self, platform):
        self._p = platform

    @property
    def num_workers(self):
        return len(self._p.workers)

    def free(self, wid):
        w = self._p.workers[wid]
        return ResourceVector(w.free_cpu, w.free_mem, w.free_sto)

    def load(self, wid):
        return self._p.workers[wid].load()

    def warm_count(self, wid, tenant, function):
        lst = self._p.workers[wid].idle_by_fn.get((tenant, function))
        return len(lst) if lst else 0

    def hosts_other_tenant(self, wid, tenant):
        w = self._p.workers[wid]
        return w.ncontainers > w.tenant_counts.get(tenant, 0)

    def recency(self, wid, tenant):
        return self._p.workers[wid].recency.get(tenant)

    # Incremental indexes below let policies avoid full-cluster scans; the
    # contents are equivalent to deriving them from the accessors above.

    def is_eligible(self, wid):
        return self._p._eligible_pos.get(wid) is not None

    def eligible_ids(self):
        """Unordered view of workers that could start the footprint right now."""
        return self._p._eligible

    def other_tenant_free_ids(self, tenant):
        """Workers with no container of any other tenant (own-only or empty)."""
        p = self._p
        ids = list(p._empty)
        own = p._exclusive.get(tenant)
        if own:
            ids.extend(own)
        return ids

    def warm_worker_ids(self, tenant, function):
        m = self._p._warm_map.get((tenant, function))
        return list(m) if m else []

    def tenant_worker_ids(self, tenant):
        """Workers currently hosting any container of this tenant."""
        m = self._p._presence.get(tenant)
        return list(m) if m else []


class PlatformState:
    def __init__(self, capacities, footprint, idle_timeout, cold_start_latency,
                 queue_limit, engine):
        """`capacities` is one ResourceVector per worker (already including any
        per-worker overrides)."""
        self.workers = [Worker(i, cap) for i, cap in enumerate(capacities)]
        self.footprint = footprint
        self._fc = footprint.cpu  # hot-path copies of the footprint components
        self._fm = footprint.memory
        self._fs = footprint.storage
        self.idle_timeout = idle_timeout
        self.cold_start_latency = cold_start_latency
        self.queue_limit = queue_limit
        self.engine = engine
        self.in_flight = 0
        self._next_cid = 0
        self._warm_map = {}    # (tenant, function) -> {wid: idle count}
        self._empty = {w.wid: True for w in self.workers}   # no containers at all
        self._exclusive = {}   # tenant -> {wid: True} workers hosting only that tenant
        self._presence = {}    # tenant -> {wid: container count} (any mix)
        # eligible = can start the footprint immediately, idle holds included
        self._eligible = []
        self._eligible_pos = {}
        for w in self.workers:
            self._refresh_eligible(w)
        self._view = PlatformView(self)

    def view(self):
        return self._view

    # -- eligibility index -------------------------------------------------

    def _refresh_eligible(self, w):
        ok = (w.free_cpu >= self._fc and w.free_mem >= self._fm
              and w.free_sto >= self._fs)
        pos = self._eligible_pos.get(w.wid)
        if ok and pos is None:
            self._eligible_pos[w.wid] = len(self._eligible)
            self._eligible.append(w.wid)
        elif not ok and pos is not None:
            last = self._eligible[-1]
            self._eligible[pos] = last
            self._eligible_pos[last] = pos
            self._eligible.pop()
            del self._eligible_pos[w.wid]

    # -- container index maintenance ----------------------------------------

    def _note_container_added(self, w, tenant):
        w.ncontainers += 1
        w.tenant_counts[tenant] = w.tenant_counts.get(tenant, 0) + 1
        pres = self._presence.setdefault(tenant, {})
        pres[w.wid] = pres.get(w.wid, 0) + 1
        self._empty.pop(w.wid, None)
        if w.ncontainers == w.tenant_counts[tenant]:
            self._exclusive.setdefault(tenant, {})[w.wid] = True
        else:
            # a second tenant appeared: the worker is exclusive to no one
            prev = self._exclusive
            for t in w.tenant_counts:
                d = prev.get(t)
                if d:
                    d.pop(w.wid, None)

    def _note_container_removed(self, w, tenant):
        w.ncontainers -= 1
        pres = self._presence[tenant]
        if pres[w.wid] == 1:
            del pres[w.wid]
        else:
            pres[w.wid] -= 1
        n = w.tenant_counts[tenant] - 1
        if n:
            w.tenant_counts[tenant] = n
        else:
            del w.tenant_counts[tenant]
            d = self._exclusive.get(tenant)
            if d:
                d.pop(w.wid, None)
        if w.ncontainers == 0:
            self._empty[w.wid] = True
        elif len(w.tenant_counts) == 1:
            sole = next(iter(w.tenant_counts))
            self._exclusive.setdefault(sole, {})[w.wid] = True

    def _add_idle(self, w, c):
        self._note_idle(w, c, add=True)

    def _note_idle(self, w, c, add):
        key = (c.tenant, c.function)
        if add:
            w.idle_by_fn.setdefault(key, []).append(c.cid)
            m = self._warm_map.setdefault(key, {})
            m[w.wid] = m.get(w.wid, 0) + 1
        else:
            lst = w.idle_by_fn[key]
            lst.remove(c.cid)
            if not lst:
                del w.idle_by_fn[key]
            m = self._warm_map[key]
            if m[w.wid] == 1:
                del m[w.wid]
                if not m:
                    del self._warm_map[key]
            else:
                m[w.wid] -= 1

    def _destroy_container(self, w, c):
        """Release an idle container's holds and drop it from every index."""
        self._note_idle(w, c, add=False)
        del w.containers[c.cid]
        w.free_mem += c.hold_mem
        w.free_sto += c.hold_sto
        self._note_container_removed(w, c.tenant)

    # -- admission -----------------------------------------------------------

    def admit(self, wid, inv):
        """Try to run `inv` on worker `wid` right now; queue or drop otherwise."""
        outcome = self._try_start(self.workers[wid], inv)
        if outcome is not None:
            self.in_flight += 1
            return outcome
        w = self.workers[wid]
        if len(w.queue) < self.queue_limit:
            w.queue.append(inv)
            self.in_flight += 1
            return PlacementOutcome.ENQUEUED
        return PlacementOutcome.DROPPED

    def _try_start(self, w, inv):
        fc, fm, fs = self._fc, self._fm, self._fs
        now = self.engine.now
        key = (inv.tenant, inv.function)
        idle = w.idle_by_fn.get(key)
        if idle:
            # reuse the most recently idled container; its hold already covers
            # part of the footprint
            c = w.containers[idle[-1]]
            if (w.free_cpu >= fc
                    and w.free_mem + c.hold_mem >= fm
                    and w.free_sto + c.hold_sto >= fs):
                self._note_idle(w, c, add=False)
                c.state = ContainerState.ACTIVE
                w.free_cpu -= fc
                w.free_mem -= fm - c.hold_mem
                w.free_sto -= fs - c.hold_sto
                w.nrunning += 1
                self._refresh_eligible(w)
                self.engine.schedule(now, _EXECUTION_START,
                                     (w.wid, inv, c.cid, True))
                return PlacementOutcome.STARTED_WARM
        if w.free_cpu >= fc:
            need_mem = fm - w.free_mem
            need_sto = fs - w.free_sto
            if need_mem > 0 or need_sto > 0:
                if not self._evict_idle(w, need_mem, need_sto):
                    return None
            c = Container(self._next_cid, inv.tenant, inv.function, w.wid,
                          ContainerState.ACTIVE, now, fm, fs)
            self._next_cid += 1
            w.containers[c.cid] = c
            self._note_container_added(w, inv.tenant)
            w.free_cpu -= fc
            w.free_mem -= fm
            w.free_sto -= fs
            w.nrunning += 1
            self._refresh_eligible(w)
            self.engine.schedule(now + self.cold_start_latency,
                                 _EXECUTION_START,
                                 (w.wid, inv, c.cid, False))
            return PlacementOutcome.STARTED_COLD
        return None

    def _evict_idle(self, w, need_mem, need_sto):
        """Evict idle containers oldest-first until the shortfall is covered.
        Returns False (and evicts nothing) when even all idles would not do."""
        idle = [c for c in w.containers.values() if c.state is ContainerState.IDLE]
        if (sum(c.hold_mem for c in idle) < need_mem
                or sum(c.hold_sto for c in idle) < need_sto):
            return False
        idle.sort(key=lambda c: (c.last_used, c.cid))
        for c in idle:
            if need_mem <= 0 and need_sto <= 0:
                break
            self._destroy_container(w, c)
            need_mem -= c.hold_mem
            need_sto -= c.hold_sto
        return True

    # -- event handlers --------------------------------------------------------

    def start_execution(self, wid, inv, now):
        w = self.workers[wid]
        w.executing.add(inv.id)
        w.recency[inv.tenant] = now

    def complete(self, wid, inv, cid, now):
        """Finish an execution, idle its container, then drain the queue while
        resources permit. Returns the invocations started from the queue."""
        w = self.workers[wid]
        if inv.id not in w.executing:
            raise InvariantViolation(
                f"completion for invocation {inv.id} not executing on worker {wid}"
            )
        w.executing.remove(inv.id)
        w.nrunning -= 1
        self.in_flight -= 1
        c = w.containers[cid]
        c.state = ContainerState.IDLE
        c.last_used = now
        w.free_cpu += self._fc
        w.free_mem += self._fm - c.hold_mem
        w.free_sto += self._fs - c.hold_sto
        self._add_idle(w, c)
        self._refresh_eligible(w)
        self.engine.schedule(now + self.idle_timeout, _RECLAIM,
                             (wid, cid, now))
        started = []
        while w.queue:
            outcome = self._try_start(w, w.queue[0])
            if outcome is None:
                break
            started.append((w.queue.popleft(), outcome))
        return started

    def reclaim(self, wid, cid, idled_at):
        """Fires when a container has sat idle for the full timeout. A reuse
        since the reclaim was scheduled makes the event stale (returns False)."""
        w = self.workers[wid]
        c = w.containers.get(cid)
        if c is None or c.state is not ContainerState.IDLE or c.last_used != idled_at:
            return False
        self._destroy_container(w, c)
        self._refresh_eligible(w)
        return True

    def prewarm(self, tenant, function, count):
        """Place idle containers for (tenant, function) on distinct least-loaded
        workers before any arrivals. Returns how many could not be placed."""
        fp = self.footprint
        remaining = count
        for w in sorted(self.workers, key=lambda w: (w.load(), w.wid)):
            if remaining == 0:
                break
            if w.free_mem < fp.memory or w.free_sto < fp.storage:
                continue
            c = Container(self._next_cid, tenant, function, w.wid,
                          ContainerState.IDLE, 0.0, fp.memory, fp.storage)
            self._next_cid += 1
            w.containers[c.cid] = c
            self._note_container_added(w, tenant)
            w.free_mem -= fp.memory
            w.free_sto -= fp.storage
            self._add_idle(w, c)
            self._refresh_eligible(w)
            self.engine.schedule(self.idle_timeout, _RECLAIM,
                                 (w.wid, c.cid, 0.0))
            remaining -= 1
        return remaining

    # -- consistency checks ------------------------------------------------------

    def check_invariants(self):
        """Debug-mode sweep; raises on any resource or queue bound violation."""
        for w in self.workers:
            used_cpu = w.cap_cpu - w.free_cpu
            used_mem = w.cap_mem - w.free_mem
            used_sto = w.cap_sto - w.free_sto
            eps = 1e-9
            if used_cpu > w.cap_cpu + eps or used_mem > w.cap_mem + eps \
                    or used_sto > w.cap_sto + eps:
                raise InvariantViolation(f"worker {w.wid} over capacity")
            if min(w.free_cpu, w.free_mem, w.free_sto) < -eps:
                raise InvariantViolation(f"worker {w.wid} negative free resources")
            if len(w.queue) > self.queue_limit:
                raise InvariantViolation(f"worker {w.wid} queue over limit")
            for inv_id in w.executing:
                if any(q.id == inv_id for q in w.queue):
                    raise InvariantViolation(
                        f"invocation {inv_id} both executing and queued")
