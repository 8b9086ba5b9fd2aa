"""Automatic monitoring: append-only tables and their retrieval API.

Three tables are kept per environment.  Column names and order are part of the
contract:

* arrival lifetimes:   name, start_time, end_time, activity_time, finished,
                       replication
* per-resource stays:  the same columns plus a trailing ``resource`` column
* resource states:     resource, time, server, queue, capacity, queue_size,
                       system, limit, replication
* attributes:          time, name, key, value, replication

``system`` is ``server + queue`` and ``limit`` is ``capacity + queue_size``
with infinity absorbing.  Retrieval always returns a data frame with the full
schema, even when no data was recorded.
"""

from __future__ import annotations

import math

import pandas as pd

ARRIVAL_COLUMNS = ["name", "start_time", "end_time", "activity_time", "finished", "replication"]
ARRIVAL_RES_COLUMNS = ARRIVAL_COLUMNS + ["resource"]
RESOURCE_COLUMNS = ["resource", "time", "server", "queue", "capacity", "queue_size", "system", "limit", "replication"]
ATTRIBUTE_COLUMNS = ["time", "name", "key", "value", "replication"]

_ARRIVAL_DTYPES = {"name": object, "start_time": float, "end_time": float,
                   "activity_time": float, "finished": bool, "replication": int}
_RESOURCE_DTYPES = {"resource": object, "time": float, "server": float, "queue": float,
                    "capacity": float, "queue_size": float, "system": float, "limit": float,
                    "replication": int}
_ATTRIBUTE_DTYPES = {"time": float, "name": object, "key": object, "value": float,
                     "replication": int}


class Monitor:
    """Collects rows during a run.  Rows are plain tuples, tables grow only."""

    __slots__ = ("arrivals", "arrivals_res", "resources", "attributes")

    def __init__(self) -> None:
        self.arrivals: list[tuple] = []
        self.arrivals_res: list[tuple] = []
        self.resources: list[tuple] = []
        self.attributes: list[tuple] = []

    def clear(self) -> None:
        self.arrivals.clear()
        self.arrivals_res.clear()
        self.resources.clear()
        self.attributes.clear()

    def copy(self) -> "Monitor":
        snap = Monitor()
        snap.arrivals = list(self.arrivals)
        snap.arrivals_res = list(self.arrivals_res)
        snap.resources = list(self.resources)
        snap.attributes = list(self.attributes)
        return snap

    # -- recording hooks -------------------------------------------------

    def record_departure(self, name: str, start: float, end: float,
                         activity: float, finished: bool) -> None:
        """A monitored arrival left the system."""
        self.arrivals.append((name, start, end, activity, finished))

    def record_leave_resource(self, resource: str, name: str, start: float,
                              end: float, activity: float, finished: bool) -> None:
        """A monitored arrival ended its stay in one resource."""
        self.arrivals_res.append((name, start, end, activity, finished, resource))

    def record_resource_state(self, resource) -> None:
        """Counter change on a monitored resource (accept, leave or modify)."""
        self.resources.append((resource.name, resource.env.engine.now,
                               resource.server_count, resource.queue_count,
                               resource.capacity, resource.queue_size))

    # accepts and modifications record the same state shape; separate names
    # keep call sites self-describing
    record_accept = record_resource_state
    record_resource_mod = record_resource_state

    def record_attribute(self, time: float, name: str, key: str, value: float) -> None:
        self.attributes.append((time, name, key, value))


def _empty_frame(columns, dtypes) -> pd.DataFrame:
    return pd.DataFrame({c: pd.Series(dtype=dtypes[c]) for c in columns})


def _as_env_list(envs):
    if isinstance(envs, (list, tuple)):
        return list(envs)
    return [envs]


def get_mon_arrivals(envs, per_resource: bool = False) -> pd.DataFrame:
    """Arrival records of one environment or a list of them.

    The replication column is the 1-based position of the environment in the
    argument list.
    """
    frames = []
    for rep, env in enumerate(_as_env_list(envs), start=1):
        rows = env.monitor.arrivals_res if per_resource else env.monitor.arrivals
        if not rows:
            continue
        if per_resource:
            df = pd.DataFrame(rows, columns=["name", "start_time", "end_time",
                                             "activity_time", "finished", "resource"])
        else:
            df = pd.DataFrame(rows, columns=["name", "start_time", "end_time",
                                             "activity_time", "finished"])
        df["replication"] = rep
        frames.append(df)
    columns = ARRIVAL_RES_COLUMNS if per_resource else ARRIVAL_COLUMNS
    if not frames:
        return _empty_frame(columns, _ARRIVAL_DTYPES | {"resource": object})
    out = pd.concat(frames, ignore_index=True)
    return out[columns]


def get_mon_resources(envs) -> pd.DataFrame:
    """Resource state records, one row per counter or limit change."""
    frames = []
    for rep, env in enumerate(_as_env_list(envs), start=1):
        rows = env.monitor.resources
        if not rows:
            continue
        df = pd.DataFrame(rows, columns=["resource", "time", "server", "queue",
                                         "capacity", "queue_size"])
        df["system"] = df["server"] + df["queue"]
        df["limit"] = df["capacity"] + df["queue_size"]
        df["replication"] = rep
        frames.append(df)
    if not frames:
        return _empty_frame(RESOURCE_COLUMNS, _RESOURCE_DTYPES)
    out = pd.concat(frames, ignore_index=True)
    return out[RESOURCE_COLUMNS]


def get_mon_attributes(envs) -> pd.DataFrame:
    """Attribute write records of monitored arrivals and global writes."""
    frames = []
    for rep, env in enumerate(_as_env_list(envs), start=1):
        rows = env.monitor.attributes
        if not rows:
            continue
        df = pd.DataFrame(rows, columns=["time", "name", "key", "value"])
        df["replication"] = rep
        frames.append(df)
    if not frames:
        return _empty_frame(ATTRIBUTE_COLUMNS, _ATTRIBUTE_DTYPES)
    out = pd.concat(frames, ignore_index=True)
    return out[ATTRIBUTE_COLUMNS]


def time_average(times, values, start: float, end: float, initial: float = 0.0) -> float:
    """Time-weighted mean of a step function sampled at change points."""
    if end <= start:
        return float("nan")
    total = 0.0
    prev_t = start
    prev_v = initial
    for t, v in zip(times, values):
        if t < start:
            prev_v = v
            continue
        if t > end:
            break
        total += prev_v * (t - prev_t)
        prev_t = t
        prev_v = v
    total += prev_v * (end - prev_t)
    return total / (end - start)


def infinity_or(value) -> float:
    return math.inf if value == math.inf else float(value)
