"""Process-oriented discrete-event simulation with trajectory models.

Build a Trajectory fluently, attach it to generators in an Environment, run,
and pull monitoring tables as DataFrames.  Deterministic tie-breaking for
simultaneous events, preemptive resources, signals, batching and reneging are
part of the core; the CLI runs declarative model files over seeded
replications.
"""

from __future__ import annotations

from .core import (FOREVER, PRIORITY_GENERAL, PRIORITY_GENERATOR,
                   PRIORITY_MANAGER, PRIORITY_MAX, PRIORITY_MIN,
                   PRIORITY_RELEASE, PRIORITY_RELEASE_POST)
from .errors import ModelError, ParseError, SimulationError
from .trajectory import Trajectory, join
from . import activities as _activities  # noqa: F401  (attaches builders)
from .processes import Generator, Manager, Prioritization, Task
from .resources import Resource
from .environment import Environment, Snapshot
from .distributions import at, constant, exponential, from_, uniform
from .monitor import (get_mon_arrivals, get_mon_attributes, get_mon_resources,
                      time_average)
from .analytic import mm1_metrics
from .modelfile import load_model, parse_model, render_model
from .replication import RunReport, export_csv, run_model

__version__ = "0.1.0"

__all__ = [
    "Environment", "Snapshot", "Trajectory", "join",
    "Generator", "Manager", "Prioritization", "Task", "Resource",
    "at", "constant", "exponential", "from_", "uniform",
    "get_mon_arrivals", "get_mon_attributes", "get_mon_resources",
    "time_average", "mm1_metrics",
    "load_model", "parse_model", "render_model",
    "run_model", "export_csv", "RunReport",
    "ModelError", "ParseError", "SimulationError",
    "FOREVER", "PRIORITY_MAX", "PRIORITY_RELEASE", "PRIORITY_MANAGER",
    "PRIORITY_RELEASE_POST", "PRIORITY_GENERATOR", "PRIORITY_GENERAL",
    "PRIORITY_MIN",
]
