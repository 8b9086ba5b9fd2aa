"""Concrete activities and the fluent methods they add to Trajectory.

Parameters may be constants or nullary callables (thunks); thunks are
evaluated when the activity executes, in the context of the executing arrival.
Class-level ``priority`` decides the event rank an arrival gets when this
activity is the next one it will execute; releases outrank capacity changes,
which outrank everything that merely consumes.
"""

from __future__ import annotations

import math

from .core import (PRIORITY_MANAGER, PRIORITY_MAX, PRIORITY_MIN,
                   PRIORITY_RELEASE)
from .errors import ModelError
from .processes import BatchEntity, Prioritization, Task, _CloneGroup
from .rendering import fmt_bool, fmt_short
from .trajectory import (Activity, BLOCK, DISPOSED, ENQUEUE, FRAME_END,
                         FRAME_RESUME, SELF_SCHEDULED, Trajectory, param_value,
                         render_param)
from . import resources as rs


def _norm_sub(t):
    """Normalize an optional sub-trajectory: empty counts as absent."""
    if t is None:
        return None
    if not isinstance(t, Trajectory):
        raise ModelError("sub-trajectory must be a Trajectory")
    return t if t.nodes else None


def _norm_flags(cont, n: int, what: str):
    """Spread continue flags over n sub-trajectory slots."""
    if n == 0:
        return ()
    if cont is None:
        return (True,) * n
    if isinstance(cont, bool):
        return (cont,) * n
    flags = tuple(bool(f) for f in cont)
    if len(flags) != n:
        raise ModelError(
            f"{what}: got {len(flags)} continue flags for {n} sub-trajectories")
    return flags


def _signal_list(value):
    value = param_value(value)
    if isinstance(value, str):
        return (value,)
    return tuple(str(s) for s in value)


# -- basic activities ----------------------------------------------------

class Log(Activity):
    tag = "Log"

    def __init__(self, message):
        super().__init__()
        self.message = message

    def execute(self, arrival):
        msg = param_value(self.message)
        env = arrival.env
        env.emit_trace(f"{fmt_short(env.engine.now)}: {arrival.name}: {msg}")
        return 0.0

    def param_text(self):
        return "message"


class Timeout(Activity):
    tag = "Timeout"

    def __init__(self, delay):
        super().__init__()
        # constants are validated once here; thunks on every draw
        self.fixed = not callable(delay)
        if self.fixed:
            delay = float(delay)
            if not delay >= 0:
                raise ModelError(f"negative timeout delay ({delay})")
        self.delay = delay

    def execute(self, arrival):
        if self.fixed:
            return self.delay
        d = float(self.delay())
        if not d >= 0:
            raise ModelError(f"{arrival.name}: negative timeout delay ({d})")
        return d

    def param_text(self):
        return f"delay: {render_param(self.delay)}"


class SetAttribute(Activity):
    tag = "SetAttribute"

    def __init__(self, key, value, global_: bool = False):
        super().__init__()
        self.key = key
        self.value = value
        self.global_ = global_

    def execute(self, arrival):
        key = str(param_value(self.key))
        value = float(param_value(self.value))
        arrival.env.write_attribute(arrival, key, value, self.global_)
        return 0.0

    def param_text(self):
        return (f"key: {param_value(self.key) if not callable(self.key) else render_param(self.key)}, "
                f"value: {render_param(self.value)}, global: {fmt_bool(self.global_)}")


class SetPrioritization(Activity):
    tag = "SetPrior"

    def __init__(self, values):
        super().__init__()
        self.values = values

    def execute(self, arrival):
        priority, preemptible, restart = param_value(self.values)
        arrival.prioritization = Prioritization(int(priority), int(preemptible),
                                                bool(restart))
        return 0.0

    def param_text(self):
        return f"values: {render_param(self.values)}"


# -- resource activities -------------------------------------------------

class Seize(Activity):
    tag = "Seize"

    def __init__(self, resource, amount=1, continue_=None, post_seize=None,
                 reject=None):
        super().__init__()
        self.resource = resource
        self.amount = amount
        self.post_seize = _norm_sub(post_seize)
        self.reject = _norm_sub(reject)
        present = [s for s in (self.post_seize, self.reject) if s is not None]
        flags = list(_norm_flags(continue_, len(present), "seize"))
        self.continue_post = flags.pop(0) if self.post_seize is not None else True
        self.continue_reject = flags.pop(0) if self.reject is not None else True

    def _resolve(self, arrival):
        return arrival.env.resource(str(param_value(self.resource)))

    def execute(self, arrival):
        res = self._resolve(arrival)
        amount = int(param_value(self.amount))
        outcome = res.request(arrival, amount, self)
        if outcome == rs.SERVED:
            if self.post_seize is not None:
                arrival.enter_sub(self.post_seize, self.continue_post, self)
            return 0.0
        if outcome == rs.ENQUEUED:
            return ENQUEUE
        if self.reject is not None:
            arrival.enter_sub(self.reject, self.continue_reject, self)
            return 0.0
        arrival.terminate(False)
        return DISPOSED

    # called by the resource when this seize is satisfied from the queue
    def route_post_seize(self, arrival):
        if self.post_seize is None:
            return
        if self.continue_post:
            arrival.frames.append((FRAME_RESUME, self.next))
        else:
            arrival.frames.append((FRAME_END, True))
        arrival.cursor = self.post_seize.nodes[0]

    def has_reject_sub(self) -> bool:
        return self.reject is not None

    def route_reject(self, arrival):
        if self.continue_reject:
            arrival.frames.append((FRAME_RESUME, self.next))
        else:
            arrival.frames.append((FRAME_END, True))
        arrival.cursor = self.reject.nodes[0]

    def subtrajectories(self):
        return tuple(s for s in (self.post_seize, self.reject) if s is not None)

    def static_resource_names(self):
        if isinstance(self.resource, str):
            yield self.resource

    def param_text(self):
        res = self.resource if isinstance(self.resource, str) else render_param(self.resource)
        return f"resource: {res}, amount: {render_param(self.amount)}"


class SeizeSelected(Seize):
    def __init__(self, amount=1, continue_=None, post_seize=None, reject=None):
        super().__init__("[selected]", amount, continue_, post_seize, reject)

    def _resolve(self, arrival):
        if arrival.selected is None:
            raise ModelError(f"{arrival.name} has no selected resource")
        return arrival.selected

    def static_resource_names(self):
        return ()


class Release(Activity):
    tag = "Release"
    priority = PRIORITY_RELEASE

    def __init__(self, resource, amount=1):
        super().__init__()
        self.resource = resource
        self.amount = amount

    def _resolve(self, arrival):
        return arrival.env.resource(str(param_value(self.resource)))

    def execute(self, arrival):
        res = self._resolve(arrival)
        res.release(arrival, int(param_value(self.amount)))
        return 0.0

    def static_resource_names(self):
        if isinstance(self.resource, str):
            yield self.resource

    def param_text(self):
        res = self.resource if isinstance(self.resource, str) else render_param(self.resource)
        return f"resource: {res}, amount: {render_param(self.amount)}"


class ReleaseSelected(Release):
    def __init__(self, amount=1):
        super().__init__("[selected]", amount)

    def _resolve(self, arrival):
        if arrival.selected is None:
            raise ModelError(f"{arrival.name} has no selected resource")
        return arrival.selected

    def static_resource_names(self):
        return ()


class SetCapacity(Activity):
    tag = "SetCapacity"
    priority = PRIORITY_MANAGER

    def __init__(self, resource, value):
        super().__init__()
        self.resource = resource
        self.value = value

    def _resolve(self, arrival):
        return arrival.env.resource(str(param_value(self.resource)))

    def execute(self, arrival):
        self._resolve(arrival).set_capacity(param_value(self.value))
        return 0.0

    def static_resource_names(self):
        if isinstance(self.resource, str):
            yield self.resource

    def param_text(self):
        res = self.resource if isinstance(self.resource, str) else render_param(self.resource)
        return f"resource: {res}, value: {render_param(self.value)}"


class SetCapacitySelected(SetCapacity):
    def __init__(self, value):
        super().__init__("[selected]", value)

    def _resolve(self, arrival):
        if arrival.selected is None:
            raise ModelError(f"{arrival.name} has no selected resource")
        return arrival.selected

    def static_resource_names(self):
        return ()


class SetQueueSize(SetCapacity):
    tag = "SetQueue"

    def execute(self, arrival):
        self._resolve(arrival).set_queue_size(param_value(self.value))
        return 0.0


class SetQueueSizeSelected(SetQueueSize):
    def __init__(self, value):
        super().__init__("[selected]", value)

    def _resolve(self, arrival):
        if arrival.selected is None:
            raise ModelError(f"{arrival.name} has no selected resource")
        return arrival.selected

    def static_resource_names(self):
        return ()


class Select(Activity):
    tag = "Select"

    POLICIES = ("shortest-queue", "round-robin", "first-available", "random")

    def __init__(self, resources, policy="shortest-queue"):
        super().__init__()
        if not callable(policy) and policy not in self.POLICIES:
            raise ModelError(f"unknown selection policy {policy!r}")
        self.resources = resources
        self.policy = policy
        self._rr = 0

    def execute(self, arrival):
        env = arrival.env
        names = param_value(self.resources)
        if isinstance(names, str):
            names = [names]
        pool = [env.resource(str(n)) for n in names]
        if not pool:
            raise ModelError("select needs at least one resource")
        policy = self.policy
        if callable(policy):
            chosen = policy(env, pool)
            if isinstance(chosen, str):
                chosen = env.resource(chosen)
        elif policy == "shortest-queue":
            chosen = min(pool, key=lambda r: r.queue_count)
        elif policy == "round-robin":
            chosen = pool[self._rr % len(pool)]
            self._rr += 1
        elif policy == "first-available":
            chosen = None
            for r in pool:
                if r._room(1):
                    chosen = r
                    break
            if chosen is None:
                for r in pool:
                    if r._queue_room(1):
                        chosen = r
                        break
            if chosen is None:
                chosen = pool[0]
        else:  # random
            chosen = pool[int(env.rng.integers(len(pool)))]
        arrival.selected = chosen
        return 0.0

    def static_resource_names(self):
        if not callable(self.resources):
            for n in self.resources:
                if isinstance(n, str):
                    yield n

    def param_text(self):
        if callable(self.resources):
            res = render_param(self.resources)
        else:
            res = "[" + ", ".join(str(n) for n in self.resources) + "]"
        pol = self.policy if not callable(self.policy) else render_param(self.policy)
        return f"resources: {res}, policy: {pol}"


# -- forks ---------------------------------------------------------------

class Branch(Activity):
    tag = "Branch"

    def __init__(self, option, continue_=None, subs=()):
        super().__init__()
        self.option = option
        self.subs = [_norm_sub(s) for s in subs]
        self.flags = _norm_flags(continue_, len(self.subs), "branch")

    def execute(self, arrival):
        k = int(param_value(self.option))
        if k == 0:
            return 0.0
        if k < 0 or k > len(self.subs):
            raise ModelError(
                f"branch option {k} out of range (0..{len(self.subs)})")
        sub = self.subs[k - 1]
        if sub is not None:
            arrival.enter_sub(sub, self.flags[k - 1], self)
        return 0.0

    def subtrajectories(self):
        return tuple(s for s in self.subs if s is not None)

    def param_text(self):
        return f"option: {render_param(self.option)}"


class Clone(Activity):
    tag = "Clone"

    def __init__(self, n, subs=()):
        super().__init__()
        self.n = n
        self.subs = [_norm_sub(s) for s in subs]

    def execute(self, arrival):
        n = int(param_value(self.n))
        if n < 1:
            n = 1
        group = _CloneGroup(n)
        arrival.clone_counters.append(group)
        copies = [arrival.clone_for_fork() for _ in range(n - 1)]
        # the original takes the first sub-trajectory and runs first
        self._route(arrival, 0)
        arrival.schedule_continuation()
        for i, copy in enumerate(copies, start=1):
            self._route(copy, i)
            copy.schedule_continuation()
        return SELF_SCHEDULED

    def _route(self, arrival, idx: int) -> None:
        sub = self.subs[idx] if idx < len(self.subs) else None
        if sub is not None:
            arrival.frames.append((FRAME_RESUME, self.next))
            arrival.cursor = sub.nodes[0]
        else:
            arrival.cursor = self.next

    def subtrajectories(self):
        return tuple(s for s in self.subs if s is not None)

    def param_text(self):
        return f"n: {render_param(self.n)}"


class Synchronize(Activity):
    tag = "Synchronize"

    def __init__(self, wait: bool = True):
        super().__init__()
        self.wait = wait

    def execute(self, arrival):
        if not arrival.clone_counters:
            return 0.0
        group = arrival.clone_counters[-1]
        group.alive -= 1
        if self.wait:
            if group.alive <= 0:
                arrival.clone_counters.pop()
                return 0.0
        elif not group.passed:
            group.passed = True
            arrival.clone_counters.pop()
            return 0.0
        arrival.discard()
        return DISPOSED

    def param_text(self):
        return f"wait: {fmt_bool(self.wait)}"


class Rollback(Activity):
    tag = "Rollback"

    def __init__(self, amount, times=math.inf, check=None):
        super().__init__()
        self.amount = amount
        self.times = times
        self.check = check

    def execute(self, arrival):
        if self.check is not None:
            go = bool(param_value(self.check))
        elif self.times == math.inf:
            go = True
        else:
            done = arrival.rollback_counts.get(id(self), 0)
            go = done < self.times
            if go:
                arrival.rollback_counts[id(self)] = done + 1
        if not go:
            return 0.0
        history = arrival.history
        if not history:
            return 0.0
        amount = int(param_value(self.amount))
        idx = len(history) - 1 - amount
        if idx < 0:
            idx = 0
        node, frames = history[idx]
        del history[idx:]
        arrival.frames = list(frames)
        arrival._reroute = node
        return 0.0

    def param_text(self):
        text = f"amount: {render_param(self.amount)}, times: {render_param(self.times)}"
        if self.check is not None:
            text += f", check: {render_param(self.check)}"
        return text


# -- batching ------------------------------------------------------------

class _BatchState:
    """A batch being collected; becomes a BatchEntity at launch."""

    __slots__ = ("node", "env", "key", "members", "timer")

    launched = False

    def __init__(self, node, env, key):
        self.node = node
        self.env = env
        self.key = key
        self.members: list = []
        self.timer = None

    def remove_member(self, arrival) -> None:
        self.members.remove(arrival)
        arrival.batch = None
        if not self.members:
            if self.timer is not None:
                self.env.engine.unschedule(self.timer)
                self.timer = None
            self.env._batches.pop(self.key, None)


class Batch(Activity):
    tag = "Batch"

    def __init__(self, n, timeout=0, permanent: bool = False, name: str = "",
                 rule=None):
        super().__init__()
        self.n = n
        self.timeout = timeout
        self.permanent = permanent
        self.name = name
        self.rule = rule

    def execute(self, arrival):
        if self.rule is not None and not param_value(self.rule):
            return 0.0
        env = arrival.env
        key = self.name if self.name else id(self)
        state = env._batches.get(key)
        if state is None:
            state = _BatchState(self, env, key)
            env._batches[key] = state
        state.members.append(arrival)
        arrival.batch = state
        n = int(param_value(self.n))
        if len(state.members) >= n:
            self._launch(state)
        elif len(state.members) == 1:
            timeout = float(param_value(self.timeout))
            if timeout > 0:
                timer = Task(f"batch-timer ({env._batch_id})",
                             lambda: self._on_timer(state))
                state.timer = timer
                env.engine.schedule(timeout, timer, PRIORITY_MIN)
        return BLOCK

    def _on_timer(self, state: _BatchState) -> None:
        state.timer = None
        if state.env._batches.get(state.key) is state and state.members:
            self._launch(state)

    def _launch(self, state: _BatchState) -> None:
        env = state.env
        env._batches.pop(state.key, None)
        if state.timer is not None:
            env.engine.unschedule(state.timer)
            state.timer = None
        name = f"batch_{env._batch_id}"
        env._batch_id += 1
        entity = BatchEntity(env, name, state.members, self.permanent,
                             state.node.next)
        for member in state.members:
            member.batch = entity
        entity.schedule_continuation()

    def param_text(self):
        return (f"n: {render_param(self.n)}, timeout: {render_param(self.timeout)}, "
                f"permanent: {fmt_bool(self.permanent)}, name: {self.name}")


class Separate(Activity):
    tag = "Separate"

    def execute(self, arrival):
        if not isinstance(arrival, BatchEntity) or arrival.permanent:
            return 0.0
        arrival.dissolve(self.next)
        return DISPOSED


# -- signals -------------------------------------------------------------

class Send(Activity):
    tag = "Send"

    def __init__(self, signals, delay=0):
        super().__init__()
        self.signals = signals
        self.delay = delay

    def execute(self, arrival):
        env = arrival.env
        signals = _signal_list(self.signals)
        delay = float(param_value(self.delay))
        task = Task("broadcast", lambda: env.broadcast(signals))
        env.engine.schedule(delay, task, PRIORITY_MIN)
        return 0.0

    def param_text(self):
        return f"signals: {render_param(self.signals)}, delay: {render_param(self.delay)}"


class Trap(Activity):
    tag = "Trap"

    def __init__(self, signals, handler=None, interruptible: bool = True):
        super().__init__()
        self.signals = signals
        self.handler = _norm_sub(handler)
        self.interruptible = interruptible

    def execute(self, arrival):
        for signal in _signal_list(self.signals):
            arrival.handlers[signal] = (self.handler, self.interruptible)
            arrival.env.subscribe(signal, arrival)
        return 0.0

    def subtrajectories(self):
        return (self.handler,) if self.handler is not None else ()

    def param_text(self):
        return f"signals: {render_param(self.signals)}"


class UnTrap(Activity):
    tag = "UnTrap"

    def __init__(self, signals):
        super().__init__()
        self.signals = signals

    def execute(self, arrival):
        for signal in _signal_list(self.signals):
            arrival.handlers.pop(signal, None)
            if arrival.renege_signal != signal:
                arrival.env.unsubscribe(signal, arrival)
        return 0.0

    def param_text(self):
        return f"signals: {render_param(self.signals)}"


class Wait(Activity):
    tag = "Wait"

    def execute(self, arrival):
        arrival.waiting = True
        return BLOCK


# -- leaving and reneging ------------------------------------------------

class Leave(Activity):
    tag = "Leave"

    def __init__(self, prob):
        super().__init__()
        self.prob = prob

    def execute(self, arrival):
        p = float(param_value(self.prob))
        if not 0 <= p <= 1:
            raise ModelError(f"leave probability {p} outside [0, 1]")
        if p >= 1 or (p > 0 and arrival.env.rng.random() < p):
            arrival.terminate(False)
            return DISPOSED
        return 0.0

    def param_text(self):
        return f"prob: {render_param(self.prob)}"


class RenegeIn(Activity):
    tag = "RenegeIn"

    def __init__(self, t, out=None):
        super().__init__()
        self.t = t
        self.out = _norm_sub(out)

    def execute(self, arrival):
        t = float(param_value(self.t))
        if not t >= 0:
            raise ModelError(f"negative renege timer ({t})")
        arrival.arm_renege_timer(t, self.out)
        return 0.0

    def subtrajectories(self):
        return (self.out,) if self.out is not None else ()

    def param_text(self):
        return f"t: {render_param(self.t)}"


class RenegeIf(Activity):
    tag = "RenegeIf"

    def __init__(self, signal, out=None):
        super().__init__()
        self.signal = signal
        self.out = _norm_sub(out)

    def execute(self, arrival):
        signal = str(param_value(self.signal))
        arrival.arm_renege_signal(signal, self.out)
        return 0.0

    def subtrajectories(self):
        return (self.out,) if self.out is not None else ()

    def param_text(self):
        return f"signal: {render_param(self.signal)}"


class RenegeAbort(Activity):
    tag = "RenegeAbort"

    def execute(self, arrival):
        arrival.cancel_renege()
        return 0.0


# -- generator management ------------------------------------------------

class Activate(Activity):
    tag = "Activate"
    priority = PRIORITY_MAX

    def __init__(self, generator):
        super().__init__()
        self.generator = generator

    def _resolve(self, arrival):
        return arrival.env.generator(str(param_value(self.generator)))

    def execute(self, arrival):
        self._resolve(arrival).activate()
        return 0.0

    def param_text(self):
        gen = self.generator if isinstance(self.generator, str) else render_param(self.generator)
        return f"generator: {gen}"


class Deactivate(Activate):
    tag = "Deactivate"

    def execute(self, arrival):
        self._resolve(arrival).deactivate()
        return 0.0


class SetTrajectory(Activate):
    tag = "SetTraj"

    def __init__(self, generator, trajectory):
        super().__init__(generator)
        if not isinstance(trajectory, Trajectory):
            raise ModelError("set_trajectory needs a trajectory")
        self.trajectory = trajectory

    def execute(self, arrival):
        env = arrival.env
        if not self.trajectory.nodes:
            raise ModelError("set_trajectory needs a non-empty trajectory")
        self._resolve(arrival).set_trajectory(env.bind(self.trajectory))
        return 0.0

    def param_text(self):
        gen = self.generator if isinstance(self.generator, str) else render_param(self.generator)
        return f"generator: {gen}, trajectory: {self.trajectory.name}"


class SetDistribution(Activate):
    tag = "SetDist"

    def __init__(self, generator, distribution):
        super().__init__(generator)
        if not callable(distribution):
            raise ModelError("set_distribution needs a callable distribution")
        self.distribution = distribution

    def execute(self, arrival):
        self._resolve(arrival).set_distribution(self.distribution)
        return 0.0

    def param_text(self):
        gen = self.generator if isinstance(self.generator, str) else render_param(self.generator)
        return f"generator: {gen}, distribution: {render_param(self.distribution)}"


# -- fluent builder methods ----------------------------------------------

def _m_log(self, message):
    return self.append(Log(message))


def _m_timeout(self, delay):
    return self.append(Timeout(delay))


def _m_set_attribute(self, key, value, global_: bool = False):
    return self.append(SetAttribute(key, value, global_))


def _m_set_prioritization(self, values):
    return self.append(SetPrioritization(values))


def _m_seize(self, resource, amount=1, continue_=None, post_seize=None,
             reject=None):
    return self.append(Seize(resource, amount, continue_, post_seize, reject))


def _m_seize_selected(self, amount=1, continue_=None, post_seize=None,
                      reject=None):
    return self.append(SeizeSelected(amount, continue_, post_seize, reject))


def _m_release(self, resource, amount=1):
    return self.append(Release(resource, amount))


def _m_release_selected(self, amount=1):
    return self.append(ReleaseSelected(amount))


def _m_set_capacity(self, resource, value):
    return self.append(SetCapacity(resource, value))


def _m_set_capacity_selected(self, value):
    return self.append(SetCapacitySelected(value))


def _m_set_queue_size(self, resource, value):
    return self.append(SetQueueSize(resource, value))


def _m_set_queue_size_selected(self, value):
    return self.append(SetQueueSizeSelected(value))


def _m_select(self, resources, policy="shortest-queue"):
    return self.append(Select(resources, policy))


def _m_branch(self, option, continue_=None, *subs):
    return self.append(Branch(option, continue_, subs))


def _m_clone(self, n, *subs):
    return self.append(Clone(n, subs))


def _m_synchronize(self, wait: bool = True):
    return self.append(Synchronize(wait))


def _m_rollback(self, amount, times=math.inf, check=None):
    return self.append(Rollback(amount, times, check))


def _m_batch(self, n, timeout=0, permanent: bool = False, name: str = "",
             rule=None):
    return self.append(Batch(n, timeout, permanent, name, rule))


def _m_separate(self):
    return self.append(Separate())


def _m_send(self, signals, delay=0):
    return self.append(Send(signals, delay))


def _m_trap(self, signals, handler=None, interruptible: bool = True):
    return self.append(Trap(signals, handler, interruptible))


def _m_untrap(self, signals):
    return self.append(UnTrap(signals))


def _m_wait(self):
    return self.append(Wait())


def _m_leave(self, prob):
    return self.append(Leave(prob))


def _m_renege_in(self, t, out=None):
    return self.append(RenegeIn(t, out))


def _m_renege_if(self, signal, out=None):
    return self.append(RenegeIf(signal, out))


def _m_renege_abort(self):
    return self.append(RenegeAbort())


def _m_activate(self, generator):
    return self.append(Activate(generator))


def _m_deactivate(self, generator):
    return self.append(Deactivate(generator))


def _m_set_trajectory(self, generator, trajectory):
    return self.append(SetTrajectory(generator, trajectory))


def _m_set_distribution(self, generator, distribution):
    return self.append(SetDistribution(generator, distribution))


_BUILDERS = {
    "log": _m_log,
    "timeout": _m_timeout,
    "set_attribute": _m_set_attribute,
    "set_prioritization": _m_set_prioritization,
    "seize": _m_seize,
    "seize_selected": _m_seize_selected,
    "release": _m_release,
    "release_selected": _m_release_selected,
    "set_capacity": _m_set_capacity,
    "set_capacity_selected": _m_set_capacity_selected,
    "set_queue_size": _m_set_queue_size,
    "set_queue_size_selected": _m_set_queue_size_selected,
    "select": _m_select,
    "branch": _m_branch,
    "clone": _m_clone,
    "synchronize": _m_synchronize,
    "rollback": _m_rollback,
    "batch": _m_batch,
    "separate": _m_separate,
    "send": _m_send,
    "trap": _m_trap,
    "untrap": _m_untrap,
    "wait": _m_wait,
    "leave": _m_leave,
    "renege_in": _m_renege_in,
    "renege_if": _m_renege_if,
    "renege_abort": _m_renege_abort,
    "activate": _m_activate,
    "deactivate": _m_deactivate,
    "set_trajectory": _m_set_trajectory,
    "set_distribution": _m_set_distribution,
}

for _name, _fn in _BUILDERS.items():
    _fn.__name__ = _name
    setattr(Trajectory, _name, _fn)
