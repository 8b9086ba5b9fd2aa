"""Command line front end.

Exit codes: 0 on success, 1 for model problems (syntax, validation, bad
parameters), 2 for failures while running.  Default worker count comes from
TRAJSIM_JOBS when set.
"""

from __future__ import annotations

import functools
import math
import sys

import click

from . import __version__
from .analytic import mm1_metrics
from .benchmarks import SUITES, run_suite
from .errors import ModelError, ParseError, SimulationError
from .modelfile import build_environment, load_model
from .replication import export_csv, run_model


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ParseError, ModelError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
        except SimulationError as exc:
            click.echo(f"runtime error: {exc}", err=True)
            sys.exit(2)
    return wrapper


@click.group()
@click.version_option(__version__, prog_name="trajsim")
def main() -> None:
    """Trajectory-based discrete-event simulation."""


@main.command()
@click.argument("model_path", metavar="MODEL",
                type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the model seed.")
@click.option("--reps", "-r", "replications", type=int, default=None,
              help="Override the replication count.")
@click.option("--until", "-u", "horizon", type=float, default=None,
              help="Override the simulation horizon.")
@click.option("--jobs", "-j", type=int, default=None,
              help="Worker processes (default: TRAJSIM_JOBS or 1).")
@click.option("--out", "-o", "out_dir", type=click.Path(file_okay=False),
              default=None, help="Directory for CSV exports.")
@click.option("--trace", is_flag=True,
              help="Run one replication with the event trace on stdout.")
@_guarded
def run(model_path, seed, replications, horizon, jobs, out_dir, trace) -> None:
    """Run MODEL over seeded replications and print a summary."""
    model = load_model(model_path)
    if trace:
        env = build_environment(model, seed=seed, trace=True)
        env.run(model.horizon if horizon is None else horizon)
        click.echo(repr(env))
        return
    report = run_model(model, seed=seed, replications=replications,
                       horizon=horizon, jobs=jobs,
                       retain_tables=out_dir is not None)
    _print_report(report)
    if out_dir is not None:
        for name, path in export_csv(report, out_dir).items():
            click.echo(f"wrote {name}: {path}")


def _print_report(report) -> None:
    click.echo(f"model: {report.model_name} | seed: {report.seed}"
               f" | replications: {len(report.replications)}"
               f" | horizon: {report.horizon:g}"
               f" | elapsed: {report.elapsed:.3f}s")
    counts = report.metric(lambda r: r.arrivals.n)
    if counts.sum() > 0:
        mean, half = report.sojourn_ci()
        click.echo(f"arrivals: mean n={counts.mean():.1f}"
                   f" | mean sojourn={mean:.6g}"
                   + ("" if math.isnan(half) else f" +/- {half:.6g} (95%)"))
    for name in report.resource_names():
        def served(rep, name=name):
            stats = rep.resources.get(name)
            return stats.avg_server if stats else math.nan
        def queued(rep, name=name):
            stats = rep.resources.get(name)
            return stats.avg_queue if stats else math.nan
        click.echo(f"resource {name}: avg server={report.metric(served).mean():.6g}"
                   f" | avg queue={report.metric(queued).mean():.6g}")
    if report.analytic is not None:
        block = report.analytic
        low, high = block["sojourn_ci"]
        click.echo(f"analytic {block['kind']}: rho={block['utilization']:g}"
                   f" N={block['mean_system']:g} T={block['mean_sojourn']:g}"
                   f" | observed T={block['observed_sojourn']:.6g}"
                   f" in [{low:.6g}, {high:.6g}]"
                   f" | covered: {'yes' if block['covered'] else 'NO'}")


@main.command()
@click.argument("model_path", metavar="MODEL",
                type=click.Path(exists=True, dir_okay=False))
@_guarded
def validate(model_path) -> None:
    """Parse and validate MODEL, reporting what it defines."""
    model = load_model(model_path)
    click.echo(f"ok: {model.name} | resources: {len(model.resources)}"
               f" | trajectories: {len(model.trajectories)}"
               f" | generators: {len(model.generators)}")


@main.command()
@click.argument("suite", type=click.Choice(sorted(SUITES)))
@click.option("--runs", type=int, default=3, help="Samples per case.")
@_guarded
def bench(suite, runs) -> None:
    """Time SUITE and print one row per case."""
    rows = run_suite(suite, runs=runs)
    if not rows:
        click.echo("no cases")
        return
    click.echo(f"{'case':<14} {'min':>10} {'mean':>10} {'median':>10} {'max':>10}")
    for row in rows:
        click.echo(f"{row.case:<14} {row.min:>10.4f} {row.mean:>10.4f}"
                   f" {row.median:>10.4f} {row.max:>10.4f}")


@main.command()
@click.argument("kind", type=click.Choice(["mm1"]))
@click.option("--lambda", "arrival_rate", type=float, required=True,
              help="Arrival rate.")
@click.option("--mu", "service_rate", type=float, required=True,
              help="Service rate.")
@_guarded
def analytic(kind, arrival_rate, service_rate) -> None:
    """Closed-form steady-state figures for an analytic model."""
    metrics = mm1_metrics(arrival_rate, service_rate)
    click.echo(f"rho: {metrics.utilization:g}")
    if not metrics.stable:
        click.echo("the system is unstable")
        return
    click.echo(f"N: {metrics.mean_system:g}")
    click.echo(f"T: {metrics.mean_sojourn:g}")


if __name__ == "__main__":
    main()
