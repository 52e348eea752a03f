"""Event engine: logical clock plus a deterministic priority queue of events.

The engine knows nothing about workers or invocations; handlers are supplied
by the caller. Events with equal timestamps dispatch in a fixed kind order
(completions free resources before new arrivals see them), and insertion
order breaks the final tie, so a run is fully reproducible.
"""

import heapq
from dataclasses import dataclass
from enum import IntEnum


class EventKind(IntEnum):
    # Numeric value doubles as the tie-break rank at equal timestamps.
    COMPLETION = 0
    RECLAIM = 1
    ARRIVAL = 2
    EXECUTION_START = 3


class DeterminismError(RuntimeError):
    """An event was scheduled into the past."""


class SimulationError(RuntimeError):
    """A handler failed; carries the event context."""


@dataclass
class SimReport:
    events_processed: int
    final_time: float
    drained: bool


class EventEngine:
    def __init__(self):
        self.now = 0.0
        self._heap = []
        self._seq = 0

    def schedule(self, time, kind, payload=None):
        if time < self.now:
            raise DeterminismError(
                f"event {kind.name} scheduled at t={time} before clock t={self.now}"
            )
        heapq.heappush(self._heap, (time, kind, self._seq, payload))
        self._seq += 1

    def pending(self):
        return len(self._heap)

    def run(self, dispatch, limit=None):
        """Pop events in (time, kind-rank, sequence) order and hand each to
        `dispatch(time, kind, payload)` until the queue is empty or the next
        event lies beyond `limit`."""
        heap = self._heap
        pop = heapq.heappop
        processed = 0
        time = self.now
        kind = None
        try:
            while heap:
                if limit is not None and heap[0][0] > limit:
                    break
                time, kind, _seq, payload = pop(heap)
                self.now = time
                dispatch(time, kind, payload)
                processed += 1
        except (DeterminismError, SimulationError):
            raise
        except Exception as exc:
            raise SimulationError(
                f"handler failed for {kind.name} at t={time}: {exc}"
            ) from exc
        return SimReport(
            events_processed=processed,
            final_time=time if processed else self.now,
            drained=not heap,
        )
