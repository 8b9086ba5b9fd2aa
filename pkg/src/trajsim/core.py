"""Event core: simulation clock, prioritized event set and the event loop.

Simultaneous events are totally ordered by (time ascending, priority rank
descending, insertion order ascending).  The integer ranks form a fixed ladder;
higher rank runs first within one instant:

    PRIORITY_MAX (6)          generator modifications (activate, deactivate, ...)
    PRIORITY_RELEASE (5)      resource release, first phase
    PRIORITY_MANAGER (4)      capacity / queue-size changes
    PRIORITY_RELEASE_POST (3) resource release, serve-next phase
    PRIORITY_GENERATOR (2)    creation of new arrivals
    PRIORITY_GENERAL (1)      ordinary activities
    PRIORITY_MIN (0)          auxiliary timers (reneging, batching, broadcasts)
"""

from __future__ import annotations

import math
from heapq import heappop, heappush

from .errors import ModelError

PRIORITY_MAX = 6
PRIORITY_RELEASE = 5
PRIORITY_MANAGER = 4
PRIORITY_RELEASE_POST = 3
PRIORITY_GENERATOR = 2
PRIORITY_GENERAL = 1
PRIORITY_MIN = 0

#: Horizon value meaning "run until the event set drains".
FOREVER = math.inf


class Engine:
    """Simulation clock plus the pending-event set.

    A process is any object with a ``run()`` method and a ``name`` attribute.
    Each process owns at most one pending event: scheduling a process that is
    already pending replaces its event.  Events are stored as heap entries
    ``(time, -rank, seq, process)``; the entry tuple doubles as the schedule
    handle.  Stale entries are dropped lazily via the process index.
    """

    __slots__ = ("now", "_heap", "_index", "_seq")

    def __init__(self) -> None:
        self.now: float = 0.0
        self._heap: list = []
        self._index: dict = {}
        self._seq: int = 0

    def schedule(self, delay: float, process, priority: int = PRIORITY_GENERAL):
        """Schedule ``process`` at ``now + delay``; returns the event handle."""
        if delay < 0:
            raise ModelError("negative schedule delay")
        self._seq += 1
        entry = (self.now + delay, -priority, self._seq, process)
        heappush(self._heap, entry)
        self._index[process] = self._seq
        return entry

    def unschedule(self, process) -> bool:
        """Drop the pending event of ``process``; False when none is pending."""
        return self._index.pop(process, None) is not None

    def is_scheduled(self, process) -> bool:
        return process in self._index

    def pending_count(self) -> int:
        return len(self._index)

    def _prune(self):
        heap = self._heap
        index = self._index
        while heap:
            head = heap[0]
            if index.get(head[3]) == head[2]:
                return head
            heappop(heap)
        return None

    def next_time(self) -> float:
        """Timestamp of the earliest pending event; infinite when empty."""
        head = self._prune()
        return head[0] if head is not None else FOREVER

    def step(self) -> bool:
        """Extract and run the next event.  False when the set is empty."""
        head = self._prune()
        if head is None:
            return False
        heappop(self._heap)
        at, _, _, process = head
        del self._index[process]
        self.now = at
        process.run()
        return True

    def run_until(self, horizon: float = FOREVER) -> float:
        """Run events with time strictly below ``horizon``.

        An event exactly at the horizon does not execute.  When the loop stops
        at a finite horizon with events still pending, the clock is advanced to
        the horizon; when the set drains first, the clock stays at the last
        executed event.
        """
        while True:
            head = self._prune()
            if head is None:
                break
            if head[0] >= horizon:
                if horizon != FOREVER and horizon > self.now:
                    self.now = horizon
                break
            heappop(self._heap)
            at, _, _, process = head
            del self._index[process]
            self.now = at
            process.run()
        return self.now

    def peek(self, k: int = 1) -> list:
        """The ``k`` earliest pending events as (time, process name) pairs."""
        index = self._index
        live = [e for e in self._heap if index.get(e[3]) == e[2]]
        live.sort()
        return [(e[0], getattr(e[3], "name", repr(e[3]))) for e in live[:k]]

    def reset(self) -> None:
        self.now = 0.0
        self._heap.clear()
        self._index.clear()
        self._seq = 0
