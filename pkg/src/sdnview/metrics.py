"""Load-balance indicators and their aggregation over time and runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

COLUMNS = ("time", "xi_f", "xi_b", "sigma_f", "sigma_b")


def xi(a: float, b: float) -> float:
    """Relative difference ``|a - b| / (a + b)``; zero when both loads are zero."""
    total = a + b
    if total == 0:
        return 0.0
    return abs(a - b) / total


def sigma(loads: Sequence[float]) -> float:
    """Population standard deviation (divisor N)."""
    n = len(loads)
    if n == 0:
        raise ValueError("sigma of an empty load vector")
    mu = math.fsum(loads) / n
    return math.sqrt(math.fsum((x - mu) ** 2 for x in loads) / n)


@dataclass
class MetricSample:
    time: float
    xi_f: float
    xi_b: float
    sigma_f: float
    sigma_b: float
    flows: tuple[float, ...] = ()
    window_bytes: tuple[float, ...] = ()

    def row(self) -> list[float]:
        return [self.time, self.xi_f, self.xi_b, self.sigma_f, self.sigma_b,
                *self.flows, *self.window_bytes]


def sample_from(time: float, flows: Sequence[float], window_bytes: Sequence[float]) -> MetricSample:
    """Build a sample from per-server flow counts and per-window byte totals.

    The relative difference only exists for two servers; other sizes report NaN.
    """
    if len(flows) == 2:
        xf, xb = xi(*flows), xi(*window_bytes)
    else:
        xf = xb = math.nan
    return MetricSample(time, xf, xb, sigma(flows), sigma(window_bytes),
                        tuple(flows), tuple(window_bytes))


def header(n_servers: int) -> list[str]:
    return [*COLUMNS,
            *(f"f_{k + 1}" for k in range(n_servers)),
            *(f"bytes_{k + 1}" for k in range(n_servers))]


def to_array(series: Sequence[MetricSample]) -> np.ndarray:
    if not series:
        return np.empty((0, len(COLUMNS)))
    return np.array([s.row() for s in series], dtype=float)


class GridMismatch(ValueError):
    pass


@dataclass
class AggregateSeries:
    """Pointwise mean over runs of sample rows laid out as :func:`header`."""

    columns: list[str]
    values: np.ndarray
    runs: int
    window: float
    smoothing: float = 0.0
    per_run_means: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    @property
    def times(self) -> np.ndarray:
        return self.values[:, 0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def scalar(self, name: str) -> float:
        """Mean over the grid and all runs (the scenario's headline number)."""
        col = self.column(name)
        return float(np.mean(col)) if len(col) else math.nan


def block_average(values: np.ndarray, size: int) -> np.ndarray:
    """Average consecutive non-overlapping blocks of ``size`` rows; the time column keeps each block's end."""
    if size <= 1:
        return values
    blocks = len(values) // size
    trimmed = values[: blocks * size].reshape(blocks, size, values.shape[1])
    out = trimmed.mean(axis=1)
    out[:, 0] = trimmed[:, -1, 0]
    return out


def aggregate(
    runs: Sequence[Sequence[MetricSample]] | Sequence[np.ndarray],
    window: float,
    smoothing: float = 0.0,
    columns: list[str] | None = None,
) -> AggregateSeries:
    if not runs:
        raise ValueError("need at least one run")
    arrays = [r if isinstance(r, np.ndarray) else to_array(r) for r in runs]
    first = arrays[0]
    for a in arrays[1:]:
        if a.shape != first.shape or not np.array_equal(a[:, 0], first[:, 0]):
            raise GridMismatch("runs were sampled on different grids")
    if columns is None:
        n_servers = (first.shape[1] - len(COLUMNS)) // 2 if first.size else 0
        columns = header(n_servers)
    stacked = np.stack(arrays)
    mean = stacked.mean(axis=0)
    per_run = stacked[:, :, 1:].mean(axis=1) if first.size else np.empty((len(arrays), 0))
    if smoothing > window:
        mean = block_average(mean, int(round(smoothing / window)))
    return AggregateSeries(columns, mean, len(arrays), window, smoothing, per_run)
