"""Deterministic event-queue engine and seeded random streams."""

from __future__ import annotations

import enum
import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np


class EventKind(enum.IntEnum):
    """Event kinds. The integer value is the dispatch priority at equal timestamps."""

    POLL_TICK = 0
    SYNC_TICK = 1
    FLOW_ARRIVAL = 2
    PACKET_EMISSION = 3
    FLOW_EXPIRY = 4
    MEASURE_TICK = 5


@dataclass
class SimEvent:
    time: float
    kind: EventKind
    seq: int
    payload: Any = None


class SchedulingError(RuntimeError):
    """Raised when an event is scheduled before the current simulated time."""


class Simulator:
    """Single-threaded discrete-event loop.

    Events are dispatched in ``(time, kind priority, insertion sequence)``
    order, so two events of the same kind at the same instant run FIFO.
    """

    def __init__(self) -> None:
        self.now = 0.0
        self._queue: list[tuple[float, int, int, SimEvent]] = []
        self._seq = itertools.count()
        self._handlers: dict[EventKind, Callable[[SimEvent], None]] = {}
        self.dispatched = 0

    def on(self, kind: EventKind, handler: Callable[[SimEvent], None]) -> None:
        self._handlers[kind] = handler

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> SimEvent:
        if time < self.now or math.isnan(time):
            raise SchedulingError(
                f"cannot schedule {kind.name} at t={time!r}; clock is at t={self.now!r}"
            )
        event = SimEvent(time, kind, next(self._seq), payload)
        heapq.heappush(self._queue, (time, int(kind), event.seq, event))
        return event

    def __len__(self) -> int:
        return len(self._queue)

    def peek_time(self) -> float | None:
        return self._queue[0][0] if self._queue else None

    def run_until(self, t_end: float) -> int:
        """Dispatch every event with ``time <= t_end`` and leave the clock at ``t_end``."""
        if t_end < self.now:
            raise SchedulingError(f"run_until({t_end!r}) is behind the clock ({self.now!r})")
        count = 0
        queue = self._queue
        handlers = self._handlers
        while queue and queue[0][0] <= t_end:
            time, _, _, event = heapq.heappop(queue)
            self.now = time
            handler = handlers.get(event.kind)
            if handler is not None:
                handler(event)
            count += 1
        self.now = t_end
        self.dispatched += count
        return count


# Purpose tags keep the streams of one run independent of each other.
PURPOSES = {"arrivals": 0, "packets": 1, "model": 2, "misc": 3}


class RngStream:
    """Seeded uniform/exponential/Pareto source for one (run, switch, purpose) label.

    Backed by numpy's PCG64 seeded through ``SeedSequence`` with the label as
    spawn key, so the same seed and label give the same draws on any platform.
    Uniforms are in ``(0, 1]`` so inverse-CDF transforms never see ``log(0)``.
    """

    def __init__(self, seed: int, run: int = 0, switch: int = 0, purpose: str = "misc"):
        self.seed = int(seed)
        self.label = (int(run), int(switch), purpose)
        ss = np.random.SeedSequence(self.seed, spawn_key=(int(run), int(switch), PURPOSES[purpose]))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def uniform(self) -> float:
        return 1.0 - float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        return 1.0 - self._gen.random(n)

    def exponential(self, rate: float) -> float:
        return -math.log(self.uniform()) / rate

    def exponentials(self, rate: float, n: int) -> np.ndarray:
        return -np.log(self.uniforms(n)) / rate
