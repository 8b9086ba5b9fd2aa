"""Resources: counted servers with a priority queue and optional preemption.

Request resolution order is fixed: serve if the servers fit the amount,
otherwise enqueue if the queue fits it, otherwise (preemptive resources with a
full queue only) preempt enough lower-preemptible holders, otherwise reject.
Preempted arrivals wait in a dedicated queue that outranks the main one when
capacity frees up.

Releases act in two phases: the count drops at release rank within the event
that executes it, and a follow-up task at post-release rank hands the freed
units to waiting arrivals.  Same-instant release/seize pairs therefore resolve
in favour of the releaser's successor deterministically.
"""

from __future__ import annotations

import bisect
import math

from .core import PRIORITY_MAX, PRIORITY_RELEASE_POST
from .errors import ModelError
from .processes import ResStay, Task

SERVED = "served"
ENQUEUED = "enqueued"
REJECTED = "rejected"


def _sort_key(item: "_QueueItem"):
    return (-item.priority, item.seq)


class _QueueItem:
    __slots__ = ("priority", "seq", "arrival", "amount", "seize_node")

    def __init__(self, priority: int, seq: int, arrival, amount: int, seize_node):
        self.priority = priority
        self.seq = seq
        self.arrival = arrival
        self.amount = amount
        self.seize_node = seize_node


class _PreemptedItem:
    __slots__ = ("arrival", "amount", "remaining", "resume_node", "seize_node")

    def __init__(self, arrival, amount: int, remaining, resume_node, seize_node):
        self.arrival = arrival
        self.amount = amount
        self.remaining = remaining
        self.resume_node = resume_node
        self.seize_node = seize_node


def _check_limit(value, what: str):
    if value == math.inf:
        return value
    v = int(value)
    if v < 0 or v != value:
        raise ModelError(f"{what} must be a non-negative integer or infinite")
    return v


class Resource:
    """A server pool plus queue, owned by an environment."""

    __slots__ = ("env", "name", "capacity", "queue_size", "monitored",
                 "preemptive", "preempt_order", "queue_size_strict",
                 "server_count", "_queue", "_preempted", "_holding", "_seq",
                 "_post_pending")

    def __init__(self, env, name: str, capacity=1, queue_size=math.inf,
                 monitored: bool = True, preemptive: bool = False,
                 preempt_order: str = "fifo", queue_size_strict: bool = False):
        if preempt_order not in ("fifo", "lifo"):
            raise ModelError(f"preempt_order must be 'fifo' or 'lifo', got {preempt_order!r}")
        self.env = env
        self.name = name
        self.capacity = _check_limit(capacity, "capacity")
        self.queue_size = _check_limit(queue_size, "queue_size")
        self.monitored = monitored
        self.preemptive = preemptive
        self.preempt_order = preempt_order
        self.queue_size_strict = queue_size_strict
        self.server_count = 0
        self._queue: list[_QueueItem] = []
        self._preempted: list[_PreemptedItem] = []
        self._holding: dict = {}  # insertion-ordered set of current holders
        self._seq = 0
        self._post_pending = False

    # -- introspection ---------------------------------------------------

    @property
    def queue_count(self) -> int:
        q = 0
        for item in self._queue:
            q += item.amount
        for item in self._preempted:
            q += item.amount
        return q

    @property
    def system_count(self) -> int:
        return self.server_count + self.queue_count

    @property
    def limit(self):
        return self.capacity + self.queue_size

    def __repr__(self) -> str:
        from .rendering import fmt_bool, fmt_count
        return (f"{{ Resource: {self.name} | monitored: {fmt_bool(self.monitored)} | "
                f"server status: {self.server_count}({fmt_count(self.capacity)}) | "
                f"queue status: {self.queue_count}({fmt_count(self.queue_size)}) }}")

    # -- internal helpers ------------------------------------------------

    def _record_state(self) -> None:
        if self.monitored:
            self.env.monitor.record_resource_state(self)

    def _room(self, amount: int) -> bool:
        return self.capacity == math.inf or self.server_count + amount <= self.capacity

    def _queue_room(self, amount: int) -> bool:
        if self.queue_size == math.inf:
            return True
        used = self.queue_count if self.queue_size_strict else sum(
            item.amount for item in self._queue)
        return used + amount <= self.queue_size

    def _stay(self, arrival) -> ResStay:
        stay = arrival.res_info.get(self)
        if stay is None:
            stay = ResStay(self.env.engine.now)
            arrival.res_info[self] = stay
        return stay

    def _serve(self, arrival, amount: int) -> None:
        stay = self._stay(arrival)
        self.server_count += amount
        stay.amount += amount
        stay.order = self._seq
        self._seq += 1
        self._holding[arrival] = None

    def _schedule_post_release(self) -> None:
        # coalesce: one post-release pass per freeing event is enough
        if self._post_pending:
            return
        self._post_pending = True
        task = Task(f"post-release ({self.name})", self._post_release)
        self.env.engine.schedule(0.0, task, PRIORITY_RELEASE_POST)

    # -- request path ----------------------------------------------------

    def request(self, arrival, amount: int, seize_node=None) -> str:
        amount = int(amount)
        if amount < 0:
            raise ModelError(f"cannot seize a negative amount of {self.name}")
        if self._room(amount):
            self._serve(arrival, amount)
            self._record_state()
            return SERVED
        if self.capacity != math.inf and amount > self.capacity:
            self._record_rejected(arrival)
            return REJECTED
        if self._queue_room(amount):
            item = _QueueItem(arrival.prioritization.priority, self._seq,
                              arrival, amount, seize_node)
            self._seq += 1
            bisect.insort(self._queue, item, key=_sort_key)
            arrival.queued_at = self
            self._stay(arrival)
            self._record_state()
            return ENQUEUED
        if self.preemptive and self._try_preempt(arrival, amount, seize_node):
            self._record_state()
            return SERVED
        self._record_rejected(arrival)
        return REJECTED

    def _record_rejected(self, arrival) -> None:
        # a refused attempt leaves one arrival-side record and no state change
        now = self.env.engine.now
        if arrival.mon >= 1:
            self.env.monitor.record_leave_resource(
                self.name, arrival.name, now, now, 0.0, False)
        stay = arrival.res_info.get(self)
        if stay is not None and stay.amount == 0:
            del arrival.res_info[self]

    def _try_preempt(self, requester, amount: int, seize_node) -> bool:
        threshold = requester.prioritization.priority
        eligible = [(holder, holder.res_info[self]) for holder in self._holding
                    if holder.prioritization.preemptible < threshold]
        if not eligible:
            return False
        reverse = self.preempt_order == "lifo"
        eligible.sort(key=lambda kv: kv[1].order, reverse=reverse)
        eligible.sort(key=lambda kv: kv[0].prioritization.preemptible)
        needed = amount - (self.capacity - self.server_count)
        chosen = []
        freed = 0
        for holder, stay in eligible:
            if freed >= needed:
                break
            chosen.append(holder)
            freed += stay.amount
        if freed < needed:
            return False
        for victim in chosen:
            self._preempt(victim)
        self._serve(requester, amount)
        return True

    def _preempt(self, victim) -> None:
        stay = victim.res_info[self]
        units = stay.amount
        remaining = None
        resume_node = None
        rem = victim.interrupt()
        if victim.prioritization.restart:
            resume_node = victim.last_delay_node
        else:
            remaining = rem
        self.server_count -= units
        stay.amount = 0
        self._holding.pop(victim, None)
        item = _PreemptedItem(victim, units, remaining, resume_node, None)
        self._preempted.append(item)
        victim.preempted_at = self
        self._record_state()

    # -- release path ----------------------------------------------------

    def release(self, arrival, amount: int = 1) -> None:
        amount = int(amount)
        stay = arrival.res_info.get(self)
        held = stay.amount if stay is not None else 0
        if amount > held:
            raise ModelError(
                f"{arrival.name} releases {amount} of {self.name} but holds {held}")
        if amount == 0:
            return
        self.server_count -= amount
        stay.amount -= amount
        now = self.env.engine.now
        if stay.amount == 0:
            del arrival.res_info[self]
            self._holding.pop(arrival, None)
            if arrival.mon >= 1:
                self.env.monitor.record_leave_resource(
                    self.name, arrival.name, stay.start, now, stay.activity, True)
        self._record_state()
        self._schedule_post_release()

    def _post_release(self) -> None:
        self._post_pending = False
        while self._preempted:
            item = self._preempted[0]
            if not self._room(item.amount):
                break
            self._preempted.pop(0)
            victim = item.arrival
            victim.preempted_at = None
            self._serve(victim, item.amount)
            self._record_state()
            if item.resume_node is not None:
                victim.cursor = item.resume_node
                victim.schedule_continuation()
            else:
                rem = item.remaining or 0.0
                if rem > 0:
                    victim._apply_activity(rem)
                    victim.busy_until = self.env.engine.now + rem
                    node = victim.cursor
                    priority = node.priority if node is not None else PRIORITY_MAX
                    self.env.engine.schedule(rem, victim, priority)
                else:
                    victim.schedule_continuation()
        while self._queue:
            item = self._queue[0]
            if not self._room(item.amount):
                break
            self._queue.pop(0)
            arrival = item.arrival
            arrival.queued_at = None
            self._serve(arrival, item.amount)
            self._record_state()
            self._route_after_serve(arrival, item.seize_node)

    def _route_after_serve(self, arrival, seize_node) -> None:
        if seize_node is not None:
            seize_node.route_post_seize(arrival)
        arrival.schedule_continuation()

    # -- queue drops -----------------------------------------------------

    def _find_queued(self, arrival):
        for i, item in enumerate(self._queue):
            if item.arrival is arrival:
                return i, item
        return -1, None

    def drop_from_queue(self, arrival) -> None:
        i, item = self._find_queued(arrival)
        if item is None:
            return
        del self._queue[i]
        arrival.queued_at = None
        self._drop_records(arrival)

    def drop_from_preempted(self, arrival) -> None:
        for i, item in enumerate(self._preempted):
            if item.arrival is arrival:
                del self._preempted[i]
                arrival.preempted_at = None
                self._drop_records(arrival)
                return

    def _drop_records(self, arrival) -> None:
        now = self.env.engine.now
        stay = arrival.res_info.pop(self, None)
        if arrival.mon >= 1:
            start = stay.start if stay is not None else now
            activity = stay.activity if stay is not None else 0.0
            self.env.monitor.record_leave_resource(
                self.name, arrival.name, start, now, activity, False)
        self._record_state()

    # -- property changes ------------------------------------------------

    def set_capacity(self, value) -> None:
        value = _check_limit(value, "capacity")
        if value == self.capacity:
            return
        grew = value > self.capacity
        self.capacity = value
        self._record_state()
        if grew:
            self._schedule_post_release()
            return
        if self.preemptive:
            # shed the excess now; non-preemptive pools let holders finish
            reverse = self.preempt_order == "lifo"
            while self.server_count > self.capacity and self._holding:
                holders = [(a, a.res_info[self]) for a in self._holding]
                holders.sort(key=lambda kv: kv[1].order, reverse=reverse)
                self._preempt(holders[0][0])

    def set_queue_size(self, value) -> None:
        value = _check_limit(value, "queue_size")
        if value == self.queue_size:
            return
        self.queue_size = value
        self._record_state()
        while self._queue and self._queue_used() > self.queue_size:
            item = self._queue.pop()  # tail: lowest priority, newest
            arrival = item.arrival
            arrival.queued_at = None
            self._drop_records(arrival)
            if item.seize_node is not None and item.seize_node.has_reject_sub():
                item.seize_node.route_reject(arrival)
                arrival.schedule_continuation()
            else:
                arrival.terminate(False)

    def _queue_used(self) -> int:
        used = sum(item.amount for item in self._queue)
        if self.queue_size_strict:
            used += sum(item.amount for item in self._preempted)
        return used
