"""Simulation environment: clock, processes, resources, monitoring, RNG.

An environment owns one event loop and one monitor.  Replications are
separate environments built from the same model with different RNG streams;
``wrap()`` freezes a finished environment into a cheap snapshot that the
monitoring retrieval functions accept in its place.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Engine, FOREVER, PRIORITY_MANAGER
from .errors import ModelError, SimulationError
from .monitor import Monitor
from .processes import Generator, Manager, Prioritization
from .rendering import fmt_full
from .resources import Resource
from .trajectory import BoundTrajectory, Trajectory


class Environment:
    """Everything one simulation run needs, with a fluent builder API."""

    def __init__(self, name: str = "anonymous", seed=None, stream: int = 1,
                 trace=True, history_limit: int = 1 << 16):
        self.name = name
        if seed is None:
            seed = np.random.SeedSequence().entropy
        self.seed = seed
        self.stream = stream
        self._epoch = 0
        self.rng = self._derive_rng()
        self.engine = Engine()
        self.monitor = Monitor()
        self.history_limit = history_limit
        if trace is True:
            self.trace = print
        elif trace is False:
            self.trace = None
        else:
            self.trace = trace
        self.resources: dict[str, Resource] = {}
        self.generators: dict[str, Generator] = {}
        self._resource_specs: list[dict] = []
        self._generator_specs: list[dict] = []
        self.global_attrs: dict[str, float] = {}
        self._subscriptions: dict[str, dict] = {}
        self._batches: dict = {}
        self._batch_id = 0
        self._active = None

    def _derive_rng(self) -> np.random.Generator:
        seq = np.random.SeedSequence((self.seed, self.stream, self._epoch))
        return np.random.default_rng(seq)

    # -- construction ----------------------------------------------------

    def add_resource(self, name: str, capacity=1, queue_size=math.inf,
                     monitored: bool = True, preemptive: bool = False,
                     preempt_order: str = "fifo",
                     queue_size_strict: bool = False) -> "Environment":
        if name in self.resources:
            raise ModelError(f"resource '{name}' already defined")
        spec = dict(name=name, capacity=capacity, queue_size=queue_size,
                    monitored=monitored, preemptive=preemptive,
                    preempt_order=preempt_order,
                    queue_size_strict=queue_size_strict)
        self._resource_specs.append(spec)
        self.resources[name] = Resource(self, **spec)
        return self

    def add_generator(self, name_prefix: str, trajectory: Trajectory, dist,
                      mon: int = 1, priority: int = 0, preemptible=None,
                      restart: bool = False) -> "Environment":
        if name_prefix in self.generators:
            raise ModelError(f"generator '{name_prefix}' already defined")
        if not isinstance(trajectory, Trajectory) or not trajectory.nodes:
            raise ModelError("generator needs a non-empty trajectory")
        if not callable(dist):
            raise ModelError("generator distribution must be callable")
        if preemptible is None:
            preemptible = priority
        spec = dict(name_prefix=name_prefix, trajectory=trajectory, dist=dist,
                    mon=mon, priority=priority, preemptible=preemptible,
                    restart=restart)
        self._generator_specs.append(spec)
        self._spawn_generator(spec)
        return self

    def _spawn_generator(self, spec: dict) -> None:
        prioritization = Prioritization(spec["priority"], spec["preemptible"],
                                        spec["restart"])
        gen = Generator(self, spec["name_prefix"],
                        self.bind(spec["trajectory"], validate=False),
                        spec["dist"], spec["mon"], prioritization)
        self.generators[spec["name_prefix"]] = gen
        gen.activate()

    def bind(self, trajectory: Trajectory, validate: bool = True) -> BoundTrajectory:
        bound = BoundTrajectory(trajectory)
        if validate:
            self._check_bound(bound, trajectory.name)
        return bound

    def _check_bound(self, bound: BoundTrajectory, name: str) -> None:
        for res in bound.resource_names():
            if res not in self.resources:
                raise ModelError(
                    f"trajectory '{name}' references unknown resource '{res}'")

    # -- lookups ---------------------------------------------------------

    def resource(self, name: str) -> Resource:
        try:
            return self.resources[name]
        except KeyError:
            raise ModelError(f"unknown resource '{name}'") from None

    def generator(self, name: str) -> Generator:
        try:
            return self.generators[name]
        except KeyError:
            raise ModelError(f"unknown generator '{name}'") from None

    # -- running ---------------------------------------------------------

    def run(self, until: float = FOREVER) -> "Environment":
        for gen in self.generators.values():
            self._check_bound(gen.trajectory, gen.trajectory.name)
        self.engine.run_until(until)
        return self

    def step(self) -> bool:
        return self.engine.step()

    def reset(self, fresh_stream: bool = False) -> "Environment":
        if fresh_stream:
            self._epoch += 1
        self.rng = self._derive_rng()
        self.engine.reset()
        self.monitor.clear()
        self.resources = {}
        for spec in self._resource_specs:
            self.resources[spec["name"]] = Resource(self, **spec)
        self.generators = {}
        self.global_attrs = {}
        self._subscriptions = {}
        self._batches = {}
        self._batch_id = 0
        self._active = None
        for spec in self._generator_specs:
            self._spawn_generator(spec)
        return self

    def wrap(self) -> "Snapshot":
        return Snapshot(self)

    # -- state getters ---------------------------------------------------

    @property
    def now(self) -> float:
        return self.engine.now

    def peek(self, k: int = 1):
        times = [t for t, _ in self.engine.peek(k)]
        if k == 1:
            return times[0] if times else math.inf
        return times

    def get_capacity(self, name: str):
        return self.resource(name).capacity

    def get_queue_size(self, name: str):
        return self.resource(name).queue_size

    def get_server_count(self, name: str) -> int:
        return self.resource(name).server_count

    def get_queue_count(self, name: str) -> int:
        return self.resource(name).queue_count

    def get_n_generated(self, name: str) -> int:
        return self.generator(name).count

    # -- state setters ---------------------------------------------------

    def set_capacity(self, name: str, value) -> "Environment":
        self.resource(name).set_capacity(value)
        return self

    def set_queue_size(self, name: str, value) -> "Environment":
        self.resource(name).set_queue_size(value)
        return self

    def schedule_manager(self, delay: float, resource: str, field: str,
                         value) -> "Environment":
        manager = Manager(self.resource(resource), field, value)
        self.engine.schedule(delay, manager, PRIORITY_MANAGER)
        return self

    def activate(self, name: str) -> "Environment":
        self.generator(name).activate()
        return self

    def deactivate(self, name: str) -> "Environment":
        self.generator(name).deactivate()
        return self

    def set_trajectory(self, name: str, trajectory: Trajectory) -> "Environment":
        self.generator(name).set_trajectory(self.bind(trajectory))
        return self

    def set_distribution(self, name: str, dist) -> "Environment":
        self.generator(name).set_distribution(dist)
        return self

    # -- attributes ------------------------------------------------------

    def get_attribute(self, key: str, global_: bool = False) -> float:
        if global_:
            return self.global_attrs.get(key, math.nan)
        arrival = self._active
        if arrival is None:
            raise ModelError(
                "per-arrival attribute read outside of an arrival context")
        value = arrival.attributes.get(key)
        if value is None:
            value = self.global_attrs.get(key, math.nan)
        return value

    def write_attribute(self, arrival, key: str, value: float,
                        global_: bool) -> None:
        # global rows carry no arrival name; per-arrival rows need mon level 2
        if global_:
            self.global_attrs[key] = value
        else:
            arrival.attributes[key] = value
        if arrival.mon >= 2:
            self.monitor.record_attribute(self.engine.now,
                                          "" if global_ else arrival.name,
                                          key, value)

    def set_global(self, key: str, value: float) -> "Environment":
        self.global_attrs[key] = float(value)
        self.monitor.record_attribute(self.engine.now, "", key, float(value))
        return self

    def get_global(self, key: str) -> float:
        return self.global_attrs.get(key, math.nan)

    # -- signals ---------------------------------------------------------

    def subscribe(self, signal: str, arrival) -> None:
        self._subscriptions.setdefault(signal, {})[arrival] = None

    def unsubscribe(self, signal: str, arrival) -> None:
        subs = self._subscriptions.get(signal)
        if subs is not None:
            subs.pop(arrival, None)

    def unsubscribe_all(self, arrival) -> None:
        for subs in self._subscriptions.values():
            subs.pop(arrival, None)

    def broadcast(self, signals) -> None:
        if isinstance(signals, str):
            signals = (signals,)
        for signal in signals:
            subs = self._subscriptions.get(signal)
            if not subs:
                continue
            for arrival in list(subs):
                arrival.on_signal(signal)

    # -- tracing and printing --------------------------------------------

    def emit_trace(self, line: str) -> None:
        if self.trace is not None:
            self.trace(line)

    def __repr__(self) -> str:
        nxt = self.engine.next_time()
        nxt_text = "" if nxt == math.inf else fmt_full(nxt)
        lines = [f"simulation environment: {self.name} | "
                 f"now: {fmt_full(self.engine.now)} | next: {nxt_text}"]
        for resource in self.resources.values():
            lines.append(repr(resource))
        for gen in self.generators.values():
            lines.append(repr(gen))
        return "\n".join(lines)


class Snapshot:
    """Frozen view of a finished environment.

    Keeps the monitor and the final counters; running or resetting it is an
    error.  The monitoring retrieval functions accept snapshots anywhere they
    accept environments.
    """

    def __init__(self, env: Environment):
        self.name = env.name
        self.monitor = env.monitor.copy()
        self._now = env.engine.now
        self._peek = [t for t, _ in env.engine.peek(1 << 30)]
        self._resources = {
            r.name: dict(capacity=r.capacity, queue_size=r.queue_size,
                         server_count=r.server_count, queue_count=r.queue_count)
            for r in env.resources.values()}
        self._generated = {g.name: g.count for g in env.generators.values()}

    @property
    def now(self) -> float:
        return self._now

    def peek(self, k: int = 1):
        times = self._peek[:k]
        if k == 1:
            return times[0] if times else math.inf
        return times

    def _res(self, name: str) -> dict:
        try:
            return self._resources[name]
        except KeyError:
            raise ModelError(f"unknown resource '{name}'") from None

    def get_capacity(self, name: str):
        return self._res(name)["capacity"]

    def get_queue_size(self, name: str):
        return self._res(name)["queue_size"]

    def get_server_count(self, name: str) -> int:
        return self._res(name)["server_count"]

    def get_queue_count(self, name: str) -> int:
        return self._res(name)["queue_count"]

    def get_n_generated(self, name: str) -> int:
        try:
            return self._generated[name]
        except KeyError:
            raise ModelError(f"unknown generator '{name}'") from None

    def run(self, until: float = FOREVER):
        raise SimulationError("environment is wrapped")

    def reset(self, fresh_stream: bool = False):
        raise SimulationError("environment is wrapped")
