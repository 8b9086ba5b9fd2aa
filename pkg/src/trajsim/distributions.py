"""Interarrival distribution helpers for generators.

A distribution is any nullary callable returning a delay, a batch of delays,
or a negative value to stop the generator.  The helpers below cover the
common cases; random ones draw from the environment RNG so that replications
stay reproducible.
"""

from __future__ import annotations

from .errors import ModelError


def at(*times):
    """Arrivals at the given absolute instants, then stop."""
    instants = [float(t) for t in times]
    if any(b < a for a, b in zip(instants, instants[1:])):
        raise ModelError("at() needs non-decreasing instants")
    batch = []
    prev = 0.0
    for t in instants:
        batch.append(t - prev)
        prev = t
    batch.append(-1.0)

    def dist():
        return batch
    return dist


def from_(start, dist):
    """First arrival at ``start``, then interarrival delays from ``dist``."""
    start = float(start)
    started = [False]

    def wrapped():
        if not started[0]:
            started[0] = True
            return start
        return dist()
    return wrapped


def constant(value):
    """The same delay every time (still drawn per call, so a generator using
    it never stops on its own)."""
    value = float(value)

    def dist():
        return value
    return dist


def exponential(env, rate, batch: int = 1):
    """Exponential interarrival delays with the given rate."""
    rate = float(rate)
    if not rate > 0:
        raise ModelError(f"exponential rate must be positive, got {rate}")
    scale = 1.0 / rate
    if batch == 1:
        def dist():
            return env.rng.exponential(scale)
    else:
        def dist():
            return env.rng.exponential(scale, size=batch)
    return dist


def uniform(env, low, high, batch: int = 1):
    """Uniform interarrival delays on [low, high)."""
    low = float(low)
    high = float(high)
    if high < low:
        raise ModelError(f"uniform needs low <= high, got ({low}, {high})")
    if batch == 1:
        def dist():
            return env.rng.uniform(low, high)
    else:
        def dist():
            return env.rng.uniform(low, high, size=batch)
    return dist
