"""Closed-form steady-state results for the M/M/1 queue.

Used to check simulated estimates against theory: mean number in system
L = rho / (1 - rho) and mean sojourn time W = 1 / (mu - lambda), with
rho = lambda / mu.  A utilization at or above 1 has no steady state; the
result is flagged unstable and carries no L/W figures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ModelError


@dataclass(frozen=True)
class MM1Metrics:
    arrival_rate: float
    service_rate: float
    utilization: float
    stable: bool
    mean_system: float     # L, jobs in system; nan when unstable
    mean_queue: float      # Lq, jobs waiting
    mean_sojourn: float    # W, time in system
    mean_wait: float       # Wq, time waiting


def mm1_metrics(arrival_rate: float, service_rate: float) -> MM1Metrics:
    lam = float(arrival_rate)
    mu = float(service_rate)
    if lam <= 0 or mu <= 0:
        raise ModelError("rates must be positive")
    rho = lam / mu
    if rho >= 1:
        return MM1Metrics(lam, mu, rho, False, math.nan, math.nan,
                          math.nan, math.nan)
    mean_system = rho / (1.0 - rho)
    mean_sojourn = 1.0 / (mu - lam)
    mean_wait = mean_sojourn - 1.0 / mu
    mean_queue = lam * mean_wait
    return MM1Metrics(lam, mu, rho, True, mean_system, mean_queue,
                      mean_sojourn, mean_wait)
