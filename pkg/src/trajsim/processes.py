"""Processes driven by the event loop: arrivals, generators, tasks, managers.

Every process exposes ``run()``; the event loop calls it once per extracted
event.  An arrival executes exactly one activity per event and then schedules
itself again with the delay the activity returned, using the priority of the
activity it is about to execute next.  That rule is what realizes the
simultaneous-event ladder: a pending release runs at release rank, a pending
capacity change at manager rank, and so on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (PRIORITY_GENERATOR, PRIORITY_MAX, PRIORITY_MIN)
from .errors import ModelError
from .trajectory import (BLOCK, DISPOSED, ENQUEUE, FRAME_END, FRAME_HANDLER,
                         FRAME_RESUME, SELF_SCHEDULED)


@dataclass(frozen=True)
class Prioritization:
    """Queueing priority, preemption threshold and restart flag of an arrival."""

    priority: int = 0
    preemptible: int = 0
    restart: bool = False

    def __post_init__(self):
        if self.preemptible < self.priority:
            raise ModelError(
                f"preemptible ({self.preemptible}) must be >= priority ({self.priority})")


class _CloneGroup:
    """Shared countdown used by clone/synchronize."""

    __slots__ = ("alive", "passed")

    def __init__(self, n: int):
        self.alive = n
        self.passed = False


class ResStay:
    """Per-resource bookkeeping of one arrival: stay start, busy time, units."""

    __slots__ = ("start", "activity", "amount", "order")

    def __init__(self, start: float):
        self.start = start
        self.activity = 0.0
        self.amount = 0
        self.order = 0


class Task:
    """One-shot process wrapping a callback (timers, broadcasts, post-release)."""

    __slots__ = ("name", "fn")

    def __init__(self, name: str, fn):
        self.name = name
        self.fn = fn

    def run(self) -> None:
        self.fn()


class Manager:
    """Applies a property change to a resource when run.

    Schedule it at manager priority to interleave correctly with same-instant
    releases and seizes.
    """

    __slots__ = ("name", "target", "field", "value")

    def __init__(self, target, field: str, value):
        if field not in ("capacity", "queue_size"):
            raise ModelError(f"manager cannot set field '{field}'")
        self.name = f"manager ({target.name}.{field})"
        self.target = target
        self.field = field
        self.value = value

    def run(self) -> None:
        if self.field == "capacity":
            self.target.set_capacity(self.value)
        else:
            self.target.set_queue_size(self.value)


class Arrival:
    """A temporary entity walking a bound trajectory.

    The return stack ``frames`` records how to continue when the current chain
    runs out: resume after a fork, close a signal handler, or end the lifetime
    with a given finished flag.
    """

    __slots__ = (
        "env", "name", "mon", "prioritization", "cursor", "frames", "_reroute",
        "start_time", "activity_time", "busy_until", "last_delay_node",
        "attributes", "res_info", "selected", "history", "track_history",
        "rollback_counts", "handlers", "handler_active", "handler_interruptible",
        "waiting", "renege_task", "renege_out", "renege_signal", "clone_counters",
        "batch", "queued_at", "preempted_at", "terminated", "_final_finished",
        "_silent",
    )

    def __init__(self, env, name: str, mon: int, prioritization: Prioritization,
                 cursor, track_history: bool = False):
        self.env = env
        self.name = name
        self.mon = mon
        self.prioritization = prioritization
        self.cursor = cursor
        self.frames: list = []
        self._reroute = None
        self.start_time = -1.0
        self.activity_time = 0.0
        self.busy_until = -1.0
        self.last_delay_node = None
        self.attributes: dict = {}
        self.res_info: dict = {}
        self.selected = None
        self.track_history = track_history
        self.history: list = [] if track_history else None
        self.rollback_counts: dict = {}
        self.handlers: dict = {}
        self.handler_active = False
        self.handler_interruptible = True
        self.waiting = False
        self.renege_task = None
        self.renege_out = None
        self.renege_signal = None
        self.clone_counters: list = []
        self.batch = None
        self.queued_at = None
        self.preempted_at = None
        self.terminated = False
        self._final_finished = True
        self._silent = False

    # -- event-loop entry ------------------------------------------------

    def run(self) -> None:
        env = self.env
        node = self.cursor
        while node is None:
            frames = self.frames
            if not frames:
                self.terminate(self._final_finished)
                return
            kind, payload = frames.pop()
            if kind == FRAME_END:
                self.terminate(payload)
                return
            if kind == FRAME_HANDLER:
                self.handler_active = False
            node = payload
        self.cursor = node
        engine = env.engine
        if self.start_time < 0:
            self.start_time = engine.now
        if self.track_history:
            history = self.history
            if len(history) >= env.history_limit:
                raise ModelError(
                    f"{self.name}: executed-path history exceeded {env.history_limit} nodes")
            history.append((node, tuple(self.frames)))
        self._reroute = None
        env._active = self
        delay = node.execute(self)
        env._active = None
        if delay is DISPOSED or delay is SELF_SCHEDULED:
            return
        reroute = self._reroute
        nxt = reroute if reroute is not None else node.next
        if delay is ENQUEUE or delay is BLOCK:
            self.cursor = nxt
            return
        finished = True
        while nxt is None:
            frames = self.frames
            if not frames:
                break
            kind, payload = frames.pop()
            if kind == FRAME_END:
                finished = payload
                break
            if kind == FRAME_HANDLER:
                self.handler_active = False
            nxt = payload
        self.cursor = nxt
        if delay:
            self.last_delay_node = node
            self._apply_activity(delay)
            self.busy_until = engine.now + delay
        if nxt is None:
            self._final_finished = finished
            engine.schedule(delay, self, PRIORITY_MAX)
        else:
            engine.schedule(delay, self, nxt.priority)

    def schedule_continuation(self, delay: float = 0.0) -> None:
        node = self.cursor
        priority = node.priority if node is not None else PRIORITY_MAX
        self.env.engine.schedule(delay, self, priority)

    # -- sub-trajectory routing -----------------------------------------

    def enter_sub(self, sub, cont: bool, fork_node) -> None:
        """Route into a fork sub-trajectory, arranging the way back."""
        if sub is None or not sub.nodes:
            if not cont:
                self.cursor = None
                self._reroute = None
                self.frames.append((FRAME_END, True))
            return
        if cont:
            self.frames.append((FRAME_RESUME, fork_node.next))
        else:
            self.frames.append((FRAME_END, True))
        self._reroute = sub.nodes[0]

    # -- activity-time accounting ---------------------------------------

    def _apply_activity(self, delta: float) -> None:
        self.activity_time += delta
        for stay in self.res_info.values():
            if stay.amount > 0:
                stay.activity += delta

    def interrupt(self) -> float:
        """Cancel the pending event, roll back pre-credited busy time.

        Returns the remaining (not yet elapsed) delay of the interrupted
        activity, 0.0 when nothing was pending.
        """
        remaining = 0.0
        if self.env.engine.unschedule(self):
            if self.busy_until >= 0:
                remaining = self.busy_until - self.env.engine.now
                if remaining < 0:
                    remaining = 0.0
                self._apply_activity(-remaining)
        self.busy_until = -1.0
        self.waiting = False
        return remaining

    # -- signals ---------------------------------------------------------

    def on_signal(self, signal: str) -> None:
        if self.terminated:
            return
        if self.renege_signal == signal:
            self.renege()
            return
        if self.queued_at is not None or self.preempted_at is not None or self.batch is not None:
            return
        if self.handler_active and not self.handler_interruptible:
            return
        entry = self.handlers.get(signal)
        if entry is None:
            return
        handler, interruptible = entry
        self.interrupt()
        if handler is not None and handler.nodes:
            if not self.handler_active:
                self.frames.append((FRAME_HANDLER, self.cursor))
                self.handler_active = True
            self.handler_interruptible = interruptible
            self.cursor = handler.nodes[0]
        self.schedule_continuation()

    # -- reneging --------------------------------------------------------

    def arm_renege_timer(self, delay: float, out) -> None:
        self.cancel_renege()
        task = Task(f"renege-timer ({self.name})", self.renege)
        self.renege_task = task
        self.renege_out = out
        self.env.engine.schedule(delay, task, PRIORITY_MIN)

    def arm_renege_signal(self, signal: str, out) -> None:
        self.cancel_renege()
        self.renege_signal = signal
        self.renege_out = out
        self.env.subscribe(signal, self)

    def cancel_renege(self) -> None:
        if self.renege_task is not None:
            self.env.engine.unschedule(self.renege_task)
            self.renege_task = None
        if self.renege_signal is not None:
            if self.renege_signal not in self.handlers:
                self.env.unsubscribe(self.renege_signal, self)
            self.renege_signal = None
        self.renege_out = None

    def renege(self) -> None:
        """Abandon the current position (queue included), then run the exit
        sub-trajectory if one was given, departing non-finished."""
        if self.terminated:
            return
        out = self.renege_out
        self.cancel_renege()
        batch = self.batch
        if batch is not None:
            if not batch.launched:
                batch.remove_member(self)
            else:
                return
        if self.queued_at is not None:
            self.queued_at.drop_from_queue(self)
        if self.preempted_at is not None:
            self.preempted_at.drop_from_preempted(self)
        self.interrupt()
        self._force_release()
        if out is not None and out.nodes:
            self.frames.append((FRAME_END, False))
            self.cursor = out.nodes[0]
            self.schedule_continuation()
        else:
            self.terminate(False)

    # -- lifecycle -------------------------------------------------------

    def _force_release(self) -> None:
        for resource in [r for r, stay in self.res_info.items() if stay.amount > 0]:
            resource.release(self, self.res_info[resource].amount)

    def discard(self) -> None:
        """Silent removal (synchronize): no lifetime record is written."""
        self._silent = True
        self.terminate(False)

    def terminate(self, finished: bool) -> None:
        if self.terminated:
            return
        self.terminated = True
        env = self.env
        env.engine.unschedule(self)
        self.cancel_renege()
        env.unsubscribe_all(self)
        if self.queued_at is not None:
            self.queued_at.drop_from_queue(self)
        self._force_release()
        if self.mon >= 1 and not self._silent:
            start = self.start_time if self.start_time >= 0 else env.engine.now
            env.monitor.record_departure(self.name, start, env.engine.now,
                                         self.activity_time, finished)

    # -- cloning ---------------------------------------------------------

    def clone_for_fork(self) -> "Arrival":
        """Copy for the clone activity: same identity, copy-on-write state,
        no resource holdings, timers or subscriptions."""
        twin = Arrival(self.env, self.name, self.mon, self.prioritization,
                       self.cursor, self.track_history)
        twin.frames = list(self.frames)
        twin.start_time = self.start_time
        twin.activity_time = self.activity_time
        twin.attributes = dict(self.attributes)
        twin.selected = self.selected
        twin.clone_counters = list(self.clone_counters)
        if self.track_history:
            twin.history = list(self.history)
        twin.rollback_counts = dict(self.rollback_counts)
        return twin


class BatchEntity(Arrival):
    """Synthetic arrival standing for a set of batched arrivals.

    It walks the trajectory as a unit; per-resource records carry its own
    ``batch_<id>`` name, while lifetime records stay with the members.  Busy
    time accrued by the entity is mirrored into the members.
    """

    __slots__ = ("members", "permanent")

    launched = True  # collecting batch state objects carry False

    def __init__(self, env, name: str, members: list, permanent: bool, cursor):
        mon = max((m.mon for m in members), default=0)
        prio = max((m.prioritization for m in members),
                   key=lambda p: p.priority, default=Prioritization())
        super().__init__(env, name, mon, prio, cursor)
        self.members = members
        self.permanent = permanent
        self._silent = True

    def _apply_activity(self, delta: float) -> None:
        super()._apply_activity(delta)
        for member in self.members:
            member.activity_time += delta

    def terminate(self, finished: bool) -> None:
        if self.terminated:
            return
        super().terminate(finished)
        for member in self.members:
            member.batch = None
            member.terminate(finished)

    def dissolve(self, resume_node) -> None:
        """Separate: members continue individually after ``resume_node``."""
        for member in self.members:
            member.batch = None
            member.cursor = resume_node
            member.schedule_continuation()
        self.members = []
        self.terminate(True)


class Generator:
    """Creates arrivals according to an interarrival distribution.

    Each fire draws one batch of interarrival delays; arrivals are created
    immediately and scheduled at the running cumulative offsets, then the
    generator re-schedules itself at the batch total.  A negative delay stops
    the generator after the values preceding it; an empty batch stops it too.
    """

    __slots__ = ("env", "name", "trajectory", "dist", "mon", "defaults",
                 "count", "active")

    def __init__(self, env, name: str, trajectory, dist, mon: int = 1,
                 prioritization: Prioritization | None = None):
        self.env = env
        self.name = name
        self.trajectory = trajectory
        self.dist = dist
        self.mon = mon
        self.defaults = prioritization or Prioritization()
        self.count = 0
        self.active = True

    def run(self) -> None:
        draws = self.dist()
        if draws is None:
            self.active = False
            return
        if isinstance(draws, (int, float)):
            draws = (draws,)
        else:
            draws = tuple(draws)
        if not draws:
            self.active = False
            return
        engine = self.env.engine
        head = self.trajectory.head
        priority = head.priority if head is not None else PRIORITY_MAX
        offset = 0.0
        stopped = False
        for d in draws:
            d = float(d)
            if d < 0:
                stopped = True
                break
            offset += d
            arrival = Arrival(self.env, f"{self.name}{self.count}", self.mon,
                              self.defaults, head, self.trajectory.needs_history)
            self.count += 1
            engine.schedule(offset, arrival, priority)
        if stopped:
            self.active = False
        else:
            engine.schedule(offset, self, PRIORITY_GENERATOR)

    def activate(self) -> None:
        """(Re)arm the generator: it fires now and draws a fresh batch."""
        self.active = True
        self.env.engine.schedule(0.0, self, PRIORITY_GENERATOR)

    def deactivate(self) -> None:
        self.env.engine.unschedule(self)
        self.active = False

    def set_trajectory(self, trajectory) -> None:
        self.trajectory = trajectory

    def set_distribution(self, dist) -> None:
        self.dist = dist

    def __repr__(self) -> str:
        return (f"{{ Generator: {self.name} | monitored: {self.mon} | "
                f"n_generated: {self.count} }}")


def is_infinite(value) -> bool:
    return value == math.inf
