"""Relative performance checks.

Absolute timings depend on the host, so every suite reports raw numbers and
callers compare cases against each other, never against fixed thresholds.
Three suites:

* ``mm1_scaling``      one saturated M/M/1 server, growing horizon
* ``batch_m_sweep``    the same system with arrivals generated m at a time
* ``thunk_vs_constant`` fixed timeout against a zero-argument callable
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass

from .distributions import at, exponential
from .environment import Environment
from .monitor import get_mon_arrivals
from .trajectory import Trajectory


@dataclass(frozen=True)
class TimingRow:
    suite: str
    case: str
    runs: int
    min: float
    mean: float
    median: float
    max: float

    @classmethod
    def from_samples(cls, suite: str, case: str, samples) -> "TimingRow":
        return cls(suite, case, len(samples), min(samples),
                   statistics.fmean(samples), statistics.median(samples),
                   max(samples))


def _time(fn, runs: int) -> list:
    samples = []
    for _ in range(runs):
        started = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - started)
    return samples


def _saturated_run(horizon: float, m: int, seed: int) -> None:
    # rho = 1/1.1: the queue grows without bound, stressing the event set
    env = Environment(seed=seed, trace=False)
    env.add_resource("server", 1, monitored=False)
    traj = Trajectory("test")
    traj.seize("server", 1).timeout(exponential(env, 1.1)).release("server", 1)
    env.add_generator("customer", traj, exponential(env, 1.0, batch=m), mon=0)
    env.run(horizon)


def batch_m_sweep(n: float = 1e4, sizes=(1, 10, 20, 50, 100),
                  runs: int = 3, seed: int = 42) -> list:
    """Generation batch size sweep on the saturated M/M/1 test."""
    if n <= 0:
        return []
    rows = []
    for m in sizes:
        samples = _time(lambda: _saturated_run(float(n), m, seed), runs)
        rows.append(TimingRow.from_samples("batch_m_sweep", f"m={m}", samples))
    return rows


def mm1_scaling(horizons=(1e3, 2e3, 5e3, 1e4), runs: int = 3,
                seed: int = 42) -> list:
    """Single-arrival generation at several horizons; informational."""
    rows = []
    for n in horizons:
        if n <= 0:
            continue
        samples = _time(lambda: _saturated_run(float(n), 1, seed), runs)
        rows.append(TimingRow.from_samples("mm1_scaling", f"n={n:g}", samples))
    return rows


def _timeout_run(n: int, delay) -> None:
    traj = Trajectory("test").timeout(delay)
    env = Environment(seed=1, trace=False)
    env.add_generator("test", traj, at(*range(1, n + 1)), mon=1)
    env.run(math.inf)
    get_mon_arrivals(env)


def thunk_vs_constant(n: int = 100_000, runs: int = 3) -> list:
    """n arrivals, one timeout each: literal delay against a thunk.

    Cases run interleaved so drift in machine load hits both equally.
    """
    if n <= 0:
        return []
    constant_samples = []
    thunk_samples = []
    for _ in range(runs):
        started = time.perf_counter()
        _timeout_run(n, 1.0)
        constant_samples.append(time.perf_counter() - started)
        started = time.perf_counter()
        _timeout_run(n, lambda: 1.0)
        thunk_samples.append(time.perf_counter() - started)
    return [
        TimingRow.from_samples("thunk_vs_constant", "constant", constant_samples),
        TimingRow.from_samples("thunk_vs_constant", "thunk", thunk_samples),
    ]


SUITES = {
    "mm1_scaling": mm1_scaling,
    "batch_m_sweep": batch_m_sweep,
    "thunk_vs_constant": thunk_vs_constant,
}


def run_suite(name: str, **kwargs) -> list:
    try:
        suite = SUITES[name]
    except KeyError:
        raise ValueError(
            f"unknown suite '{name}' (choose from {', '.join(SUITES)})"
        ) from None
    return suite(**kwargs)
