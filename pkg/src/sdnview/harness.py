"""Run scenarios on either engine, sweep a parameter, and write CSV output."""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .controlplane import Collection, Distribution
from .metrics import COLUMNS, AggregateSeries, MetricSample, aggregate, header, to_array
from .model import LagPolicy, run_model
from .network import NetworkSimulation, SimConfig
from .scenario import Scenario

log = logging.getLogger(__name__)

SIGNIFICANT = 9
METRICS = COLUMNS[1:]


class SweepError(RuntimeError):
    def __init__(self, message: str, partial: "SweepResult"):
        super().__init__(message)
        self.partial = partial


def fmt(value: float) -> str:
    """Nine significant digits; ``nan`` and ``inf`` spelled as such."""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if math.isnan(value):
        return "nan"
    return format(float(value), f".{SIGNIFICANT}g")


def model_lag(scenario: Scenario) -> tuple[LagPolicy, str]:
    """Decision-input staleness and units the recurrence should use for a scenario."""
    coll, dist = scenario.collection, scenario.distribution
    active = coll.kind is Collection.ACTIVE
    local = coll.poll if active else 0.0
    remote = dist.sync if dist.kind is Distribution.PERIODIC else 0.0
    if scenario.single_controller or scenario.domains == 1:
        remote = local
    elif dist.kind is Distribution.NONE:
        # Without distribution a controller never learns remote loads.
        remote = math.inf
    if remote == math.inf:
        raise ValueError("the recurrence needs a finite view of every server")
    return LagPolicy(local, remote, scenario.lag_mode), "bytes" if active else "flows"


def run_once(scenario: Scenario, run: int, *, check_invariants: bool = False) -> np.ndarray:
    """One seeded run; returns the sample rows as an array (see :func:`metrics.header`)."""
    profile = scenario.profile()
    if scenario.engine == "model":
        lag, units = model_lag(scenario)
        samples = run_model(
            profile, lag, scenario.horizon, seed=scenario.seed, run=run,
            window=scenario.window, units=units,
            single_controller=scenario.single_controller or scenario.domains == 1,
        )
    else:
        config = SimConfig(
            scenario.topology, profile, scenario.collection, scenario.distribution,
            scenario.horizon, scenario.window,
        )
        sim = NetworkSimulation(config, scenario.seed, run, check_invariants=check_invariants)
        samples = sim.run()
    return _rows(samples, scenario.domains)


def _rows(samples: Sequence[MetricSample], n: int) -> np.ndarray:
    if not samples:
        return np.empty((0, len(header(n))))
    return to_array(samples)


def _run_star(args: tuple) -> np.ndarray:
    scenario, run, check = args
    return run_once(scenario, run, check_invariants=check)


def run_scenario(
    scenario: Scenario,
    *,
    jobs: int = 1,
    check_invariants: bool = False,
) -> AggregateSeries:
    """All runs of one scenario averaged pointwise."""
    tasks = [(scenario, r, check_invariants) for r in range(scenario.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            arrays = list(pool.map(_run_star, tasks))
    else:
        arrays = [_run_star(t) for t in tasks]
    return aggregate(arrays, scenario.window, scenario.smoothing, header(scenario.domains))


@dataclass
class SweepPoint:
    value: float
    series: AggregateSeries | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def metric(self, name: str) -> float:
        return self.series.scalar(name) if self.series is not None else math.nan


@dataclass
class SweepResult:
    scenario: Scenario
    parameter: str
    points: list[SweepPoint] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [p.value for p in self.points]

    def metric(self, name: str) -> list[float]:
        return [p.metric(name) for p in self.points]

    @property
    def complete(self) -> bool:
        return all(p.ok for p in self.points) and \
            len(self.points) == len(self.scenario.sweep.values)


def _average_over_sync(scenario: Scenario, values: Sequence[float], **kw) -> AggregateSeries:
    """Mean of per-sync aggregates; rows and per-run means are averaged alike."""
    parts = [run_scenario(scenario.with_value("sync", s), **kw) for s in values]
    first = parts[0]
    return AggregateSeries(
        first.columns,
        np.mean([p.values for p in parts], axis=0),
        first.runs,
        first.window,
        first.smoothing,
        np.mean([p.per_run_means for p in parts], axis=0),
    )


def run_sweep(scenario: Scenario, *, jobs: int = 1, check_invariants: bool = False) -> SweepResult:
    """Run every point of the scenario's sweep with common seeds.

    An engine error stops the sweep; the points finished so far travel on the
    raised :class:`SweepError`.
    """
    spec = scenario.sweep
    if spec is None:
        raise ValueError(f"scenario {scenario.name!r} has no [sweep] section")
    result = SweepResult(scenario, spec.parameter)
    for value in spec.values:
        point = SweepPoint(value)
        result.points.append(point)
        try:
            variant = scenario.with_value(spec.parameter, value)
            if spec.average_over_sync:
                point.series = _average_over_sync(
                    variant, spec.average_over_sync, jobs=jobs, check_invariants=check_invariants)
            else:
                point.series = run_scenario(variant, jobs=jobs, check_invariants=check_invariants)
        except Exception as exc:
            point.error = f"{type(exc).__name__}: {exc}"
            log.error("sweep %s stopped at %s=%s: %s", scenario.name, spec.parameter, value, exc)
            raise SweepError(point.error, result) from exc
        log.info("%s %s=%s xi_b=%.4f", scenario.name, spec.parameter, value,
                 point.metric("xi_b"))
    return result


# -- output ----------------------------------------------------------------

def write_series(path: Path, series: AggregateSeries) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(series.columns)
        for row in series.values:
            writer.writerow([fmt(v) for v in row])
    return path


def write_run_means(path: Path, series: AggregateSeries) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", *series.columns[1:]])
        for r, row in enumerate(series.per_run_means):
            writer.writerow([r, *(fmt(v) for v in row)])
    return path


def write_summary(path: Path, result: SweepResult) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([result.parameter, *METRICS, "runs", "status"])
        for point in result.points:
            runs = point.series.runs if point.series is not None else 0
            writer.writerow([fmt(point.value), *(fmt(point.metric(m)) for m in METRICS), runs,
                             "ok" if point.ok else f"error: {point.error}"])
        if not result.complete:
            writer.writerow(["#", "incomplete sweep"])
    return path


def point_label(parameter: str, value: float) -> str:
    return f"{parameter}-{fmt(value)}"


def emit_sweep(out_dir: Path, result: SweepResult) -> list[Path]:
    base = Path(out_dir) / result.scenario.name
    written = [write_summary(base / "summary.csv", result)]
    for point in result.points:
        if point.series is not None:
            written.append(write_series(base / f"{point_label(result.parameter, point.value)}.csv",
                                        point.series))
    return written


def emit_run(out_dir: Path, scenario: Scenario, series: AggregateSeries) -> list[Path]:
    base = Path(out_dir) / scenario.name
    return [write_series(base / "series.csv", series),
            write_run_means(base / "runs.csv", series)]


def override(scenario: Scenario, **changes) -> Scenario:
    """Replace top-level scenario fields, skipping ``None`` values."""
    changes = {k: v for k, v in changes.items() if v is not None}
    return dataclasses.replace(scenario, **changes) if changes else scenario
