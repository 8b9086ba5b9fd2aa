"""Seeded replications of a model, optionally in parallel, plus CSV export.

Replication ``i`` runs on RNG stream ``i`` of the shared seed, so reports are
reproducible for any job count: workers are independent environments and
results merge by replication index after all complete.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .environment import Snapshot
from .modelfile import Model, build_environment, load_model
from .monitor import (ARRIVAL_COLUMNS, ATTRIBUTE_COLUMNS, RESOURCE_COLUMNS,
                      time_average)
from .rendering import fmt_cell


@dataclass
class ArrivalStats:
    n: int = 0
    n_finished: int = 0
    mean_sojourn: float = math.nan
    mean_activity: float = math.nan
    rate: float = math.nan  # departures per unit time


@dataclass
class ResourceStats:
    name: str
    mean_server: float = math.nan   # plain mean over samples, not time-weighted
    mean_queue: float = math.nan
    avg_server: float = math.nan    # time averages over [0, end]
    avg_queue: float = math.nan
    avg_system: float = math.nan


@dataclass
class ReplicationResult:
    index: int
    end_time: float
    n_generated: dict
    arrivals: ArrivalStats
    resources: dict
    snapshot: Snapshot | None = None


@dataclass
class RunReport:
    model_name: str
    seed: int
    horizon: float
    replications: list = field(default_factory=list)
    elapsed: float = 0.0
    analytic: dict | None = None

    def metric(self, fn) -> np.ndarray:
        return np.array([fn(rep) for rep in self.replications], dtype=float)

    def sojourn_ci(self, level: float = 0.95):
        return ci_mean(self.metric(lambda r: r.arrivals.mean_sojourn), level)

    def snapshots(self) -> list:
        out = [rep.snapshot for rep in self.replications]
        if any(snap is None for snap in out):
            raise ValueError("run_model was called with retain_tables=False")
        return out

    def resource_names(self) -> list:
        names: list[str] = []
        for rep in self.replications:
            for name in rep.resources:
                if name not in names:
                    names.append(name)
        return names


def ci_mean(values, level: float = 0.95):
    """(mean, half_width) of the t-based confidence interval."""
    values = np.asarray(values, dtype=float)
    values = values[~np.isnan(values)]
    n = len(values)
    if n == 0:
        return math.nan, math.nan
    mean = float(values.mean())
    if n == 1:
        return mean, math.nan
    sd = float(values.std(ddof=1))
    quantile = float(sps.t.ppf(0.5 + level / 2.0, n - 1))
    return mean, quantile * sd / math.sqrt(n)


def _collect(env, index: int, end_time: float,
             retain_tables: bool) -> ReplicationResult:
    monitor = env.monitor
    arrival_stats = ArrivalStats()
    rows = monitor.arrivals
    if rows:
        sojourns = [end - start for _, start, end, _, _ in rows]
        activities = [activity for _, _, _, activity, _ in rows]
        arrival_stats.n = len(rows)
        arrival_stats.n_finished = sum(1 for r in rows if r[4])
        arrival_stats.mean_sojourn = sum(sojourns) / len(rows)
        arrival_stats.mean_activity = sum(activities) / len(rows)
        if end_time > 0:
            arrival_stats.rate = len(rows) / end_time
    by_resource: dict[str, list] = {}
    for row in monitor.resources:
        by_resource.setdefault(row[0], []).append(row)
    resource_stats = {}
    for name, rws in by_resource.items():
        times = [r[1] for r in rws]
        servers = [r[2] for r in rws]
        queues = [r[3] for r in rws]
        stats = ResourceStats(
            name,
            mean_server=sum(servers) / len(rws),
            mean_queue=sum(queues) / len(rws),
            avg_server=time_average(times, servers, 0.0, end_time),
            avg_queue=time_average(times, queues, 0.0, end_time),
        )
        stats.avg_system = stats.avg_server + stats.avg_queue
        resource_stats[name] = stats
    generated = {name: gen.count for name, gen in env.generators.items()}
    snapshot = env.wrap() if retain_tables else None
    return ReplicationResult(index, end_time, generated, arrival_stats,
                             resource_stats, snapshot)


def _run_one(args) -> ReplicationResult:
    model, seed, index, horizon, retain_tables = args
    env = build_environment(model, seed=seed, stream=index, trace=False)
    env.run(horizon)
    return _collect(env, index, env.now, retain_tables)


def default_jobs() -> int:
    value = os.environ.get("TRAJSIM_JOBS", "").strip()
    if value:
        return max(1, int(value))
    return 1


def run_model(model, seed=None, replications=None, horizon=None,
              jobs: int | None = None, retain_tables: bool = True) -> RunReport:
    """Run a model (object or file path) over seeded replications."""
    if isinstance(model, (str, os.PathLike)):
        model = load_model(os.fspath(model))
    if not isinstance(model, Model):
        raise TypeError("model must be a Model or a path to a model file")
    seed = model.seed if seed is None else int(seed)
    replications = model.replications if replications is None else int(replications)
    horizon = model.horizon if horizon is None else float(horizon)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    started = time.perf_counter()
    work = [(model, seed, i, horizon, retain_tables)
            for i in range(1, replications + 1)]
    if jobs > 1 and replications > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, replications)) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(item) for item in work]
    results.sort(key=lambda rep: rep.index)
    report = RunReport(model.name, seed, horizon, results,
                       time.perf_counter() - started)
    if model.analytic is not None:
        report.analytic = _analytic_block(model.analytic, report)
    return report


def _analytic_block(tag, report: RunReport) -> dict:
    from .analytic import mm1_metrics
    kind, lam, mu = tag
    theory = mm1_metrics(lam, mu)
    mean, half = report.sojourn_ci()
    return {
        "kind": kind,
        "utilization": theory.utilization,
        "mean_system": theory.mean_system,
        "mean_sojourn": theory.mean_sojourn,
        "observed_sojourn": mean,
        "sojourn_ci": (mean - half, mean + half),
        "covered": bool(mean - half <= theory.mean_sojourn <= mean + half),
    }


# -- CSV export ----------------------------------------------------------

def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_cell(value) for value in row])


def export_csv(report: RunReport, out_dir: str) -> dict:
    """Write arrivals.csv, resources.csv and attributes.csv; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    snapshots = report.snapshots()
    tables = {
        "arrivals": (ARRIVAL_COLUMNS,
                     lambda m, i: (row + (i,) for row in m.arrivals)),
        "resources": (RESOURCE_COLUMNS,
                      lambda m, i: ((*row[:6], row[2] + row[3], row[4] + row[5], i)
                                    for row in m.resources)),
        "attributes": (ATTRIBUTE_COLUMNS,
                       lambda m, i: (row + (i,) for row in m.attributes)),
    }
    paths = {}
    for name, (header, pull) in tables.items():
        rows = []
        for position, snap in enumerate(snapshots, start=1):
            rows.extend(pull(snap.monitor, position))
        path = os.path.join(out_dir, f"{name}.csv")
        _write_csv(path, header, rows)
        paths[name] = path
    return paths
