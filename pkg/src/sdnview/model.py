"""Recurrence model of the least-loaded balancer, stepped once per flow arrival.

State is advanced with the recurrences themselves (running total, running
difference for two servers, running mean) rather than recomputed from the
load vector, so the identities between them can be checked independently.
"""

from __future__ import annotations

import bisect
import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .controlplane import lb_decide
from .metrics import MetricSample, sample_from
from .traffic import FlowSource, TrafficProfile


@dataclass
class ModelState:
    loads: list[float]
    index: int = 0
    total: float = 0.0
    delta: float = 0.0
    mu: float = 0.0
    sigma: float = 0.0

    @classmethod
    def zeros(cls, n: int) -> "ModelState":
        return cls([0] * n)

    @property
    def n(self) -> int:
        return len(self.loads)

    def copy(self) -> "ModelState":
        return ModelState(list(self.loads), self.index, self.total, self.delta, self.mu, self.sigma)


SLIDING = "sliding"
PERIODIC = "periodic"


@dataclass(frozen=True)
class LagPolicy:
    """How old the decision inputs are, in seconds.

    ``local`` applies to servers in the deciding controller's own domain and
    ``remote`` to the others; zero means the current load net of expiries.
    With ``mode="sliding"`` a lag ``s`` reads the load at ``t - s``. With
    ``mode="periodic"`` it reads the load at the last multiple of ``s``,
    i.e. the value exchanged at the most recent poll or sync tick.
    """

    local: float = 0.0
    remote: float = 0.0
    mode: str = SLIDING

    def __post_init__(self) -> None:
        if self.mode not in (SLIDING, PERIODIC):
            raise ValueError(f"unknown lag mode {self.mode!r}")
        if self.local < 0 or self.remote < 0:
            raise ValueError("lags must be non-negative")

    @property
    def zero(self) -> bool:
        return self.local == 0 and self.remote == 0

    def as_of(self, t: float, lag: float) -> float:
        if self.mode == SLIDING:
            return t - lag
        return math.floor(t / lag) * lag


ZERO_LAG = LagPolicy()


def advance(state: ModelState, expired: Sequence[float], server: int, weight: float = 1) -> ModelState:
    """Remove ``expired`` and add one flow of ``weight`` to ``server``."""
    n = state.n
    new = [state.loads[k] - expired[k] for k in range(n)]
    new[server] += weight
    gone = sum(expired)
    out = ModelState(new, state.index + 1)
    out.total = state.total + weight - gone
    out.mu = state.mu - gone / n + weight / n
    if n == 2:
        m1 = weight if server == 0 else 0
        m2 = weight if server == 1 else 0
        out.delta = state.delta + (m1 - m2) + (expired[1] - expired[0])
    out.sigma = math.sqrt(math.fsum((x - out.mu) ** 2 for x in new) / n)
    return out


def decision_loads(state: ModelState, expired: Sequence[float]) -> list[float]:
    return [state.loads[k] - expired[k] for k in range(state.n)]


def step_xi(
    state: ModelState,
    expired: Sequence[float],
    decision: Sequence[float] | None = None,
    weight: float = 1,
) -> tuple[ModelState, float]:
    """One arrival for two servers; returns the new state and its relative difference.

    ``decision`` holds the per-server loads the controller sees; by default
    they are the current loads net of this step's expiries.
    """
    if state.n != 2:
        raise ValueError("the relative-difference recurrence needs exactly two servers")
    if decision is None:
        d = state.delta - expired[0] + expired[1]
    else:
        d = decision[0] - decision[1]
    server = 0 if d <= 0 else 1
    new = advance(state, expired, server, weight)
    xi = abs(new.delta) / new.total if new.total else 0.0
    return new, xi


def step_sigma(
    state: ModelState,
    expired: Sequence[float],
    decision: Sequence[float] | None = None,
    weight: float = 1,
) -> tuple[ModelState, float]:
    if decision is None:
        decision = decision_loads(state, expired)
    new = advance(state, expired, lb_decide(decision), weight)
    return new, new.sigma


@dataclass
class _History:
    times: list[float] = field(default_factory=lambda: [0.0])
    loads: list[list[float]] = field(default_factory=list)

    def append(self, t: float, loads: list[float]) -> None:
        self.times.append(t)
        self.loads.append(list(loads))

    def at_or_before(self, t: float) -> list[float]:
        i = bisect.bisect_right(self.times, t) - 1
        return self.loads[max(i, 0)]


def run_model(
    profile: TrafficProfile,
    lag: LagPolicy = ZERO_LAG,
    horizon: float = 300.0,
    *,
    seed: int = 0,
    run: int = 0,
    window: float = 2.0,
    units: str = "flows",
    single_controller: bool = False,
    trace: list | None = None,
) -> list[MetricSample]:
    """Monte Carlo run of the recurrence over one seeded arrival trace.

    Flow arrivals are drawn from the same streams as the event simulator.
    Each arrival is handled by the controller of its origin switch, which
    decides on ``units`` (``"flows"`` or ``"bytes"``) looked up through
    ``lag``. Both a flow-count and a byte-valued state are carried; a flow
    weighs its mean lifetime volume in the latter. Samples land on the same
    measurement grid as the simulator.
    """
    if units not in ("flows", "bytes"):
        raise ValueError(f"units must be 'flows' or 'bytes', not {units!r}")
    n = profile.size
    sources = [FlowSource(profile, k, seed, run) for k in range(n)]
    volume = [profile.expected_flow_bytes(k) for k in range(n)]
    ttl = profile.ttl

    flows = ModelState.zeros(n)
    nbytes = ModelState.zeros(n)
    history = _History(loads=[[0] * n])
    current: list[float] = [0] * n
    pending: deque[tuple[float, int, float]] = deque()
    arrivals = [(src.next_arrival(0.0), k) for k, src in enumerate(sources)]
    heapq.heapify(arrivals)
    samples: list[MetricSample] = []
    tick = 1

    def expired_by(t: float) -> tuple[list[int], list[float]]:
        ef, eb = [0] * n, [0.0] * n
        for expiry, server, vol in pending:
            if expiry > t:
                break
            ef[server] += 1
            eb[server] += vol
        return ef, eb

    def pop_expired(t: float) -> tuple[list[int], list[float]]:
        ef, eb = [0] * n, [0.0] * n
        while pending and pending[0][0] <= t:
            expiry, server, vol = pending.popleft()
            ef[server] += 1
            eb[server] += vol
            current[server] -= 1 if units == "flows" else vol
            history.append(expiry, current)
        return ef, eb

    while True:
        t, origin = arrivals[0]
        while tick * window <= horizon and tick * window < t:
            now = tick * window
            ef, eb = expired_by(now)
            samples.append(sample_from(
                now,
                [flows.loads[k] - ef[k] for k in range(n)],
                [nbytes.loads[k] - eb[k] for k in range(n)],
            ))
            tick += 1
        if t > horizon:
            break
        heapq.heapreplace(arrivals, (sources[origin].next_arrival(t), origin))

        ef, eb = pop_expired(t)
        state, expired = (flows, ef) if units == "flows" else (nbytes, eb)
        if lag.zero:
            decision = decision_loads(state, expired)
        else:
            decision = []
            for k in range(n):
                local = single_controller or k == origin
                age = lag.local if local else lag.remote
                if age == 0:
                    decision.append(state.loads[k] - expired[k])
                else:
                    decision.append(history.at_or_before(lag.as_of(t, age))[k])
        if n == 2:
            server = 0 if decision[0] - decision[1] <= 0 else 1
        else:
            server = lb_decide(decision)

        flows = advance(flows, ef, server, 1)
        nbytes = advance(nbytes, eb, server, volume[origin])
        pending.append((t + ttl, server, volume[origin]))
        current[server] += 1 if units == "flows" else volume[origin]
        history.append(t, current)
        if trace is not None:
            trace.append((t, origin, server, tuple(ef), flows.copy()))
    return samples
