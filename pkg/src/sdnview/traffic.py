"""Flow arrival and per-flow packet processes.

Two packet processes are supported: a Poisson process of rate ``p`` over the
flow lifetime, and an On/Off source with Pareto-distributed burst lengths
(counted in packets, sent back-to-back at ``1/p`` spacing) and Pareto idle
times, in the style of the NS-2 Pareto generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .simcore import RngStream

POISSON = "poisson"
PARETO = "pareto"

DEFAULT_PAYLOAD = 4096
DEFAULT_TTL = 2.0
DEFAULT_SHAPE = 1.5


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class SwitchTraffic:
    """Traffic parameters for the clients behind one switch."""

    flow_rate: float
    packet_rate: float
    burst: float = 0.0
    idle: float = 0.0


@dataclass(frozen=True)
class TrafficProfile:
    name: str
    switches: tuple[SwitchTraffic, ...]
    process: str = POISSON
    ttl: float = DEFAULT_TTL
    payload: int = DEFAULT_PAYLOAD
    shape: float = DEFAULT_SHAPE

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if not self.switches:
            raise ProfileError(f"profile {self.name!r} has no switches")
        if self.process not in (POISSON, PARETO):
            raise ProfileError(f"unknown packet process {self.process!r}")
        if not self.ttl > 0:
            raise ProfileError(f"ttl must be > 0, got {self.ttl}")
        if not self.payload > 0:
            raise ProfileError(f"payload must be > 0, got {self.payload}")
        for k, sw in enumerate(self.switches):
            if not (sw.flow_rate > 0 and sw.packet_rate > 0):
                raise ProfileError(f"switch {k}: flow and packet rates must be > 0")
        if self.process == PARETO:
            if not 1 < self.shape < 2:
                raise ProfileError(f"On/Off Pareto needs 1 < shape < 2, got {self.shape}")
            for k, sw in enumerate(self.switches):
                if not (sw.burst > 0 and sw.idle > 0):
                    raise ProfileError(f"switch {k}: mean burst and idle must be > 0")

    @property
    def size(self) -> int:
        return len(self.switches)

    def duty_cycle(self, k: int) -> float:
        if self.process == POISSON:
            return 1.0
        sw = self.switches[k]
        return sw.burst / (sw.burst + sw.idle)

    def expected_flow_bytes(self, k: int) -> float:
        """Mean bytes carried by one flow from switch ``k`` over its lifetime."""
        sw = self.switches[k]
        return sw.packet_rate * self.ttl * self.duty_cycle(k) * self.payload


@dataclass(slots=True, eq=False)
class Flow:
    id: int
    origin: int
    arrival: float
    expiry: float
    emissions: np.ndarray = field(repr=False)
    server: int | None = None
    sent: int = 0
    bytes_sent: int = 0

    @property
    def packet_count(self) -> int:
        return len(self.emissions)


def next_flow_interarrival(rate: float, rng: RngStream) -> float:
    return -math.log(rng.uniform()) / rate


def next_packet_time_poisson(
    previous: float, expiry: float, rate: float, rng: RngStream
) -> float | None:
    """Next Poisson emission after ``previous``, or ``None`` once it falls at or past ``expiry``."""
    t = previous - math.log(rng.uniform()) / rate
    return None if t >= expiry else t


def poisson_packet_schedule(
    arrival: float, expiry: float, rate: float, rng: RngStream
) -> np.ndarray:
    # Batched draws; a chunk is sized so that one is almost always enough.
    mean = rate * (expiry - arrival)
    chunk = int(mean + 5.0 * math.sqrt(mean) + 8)
    times = arrival + np.cumsum(rng.exponentials(rate, chunk))
    while times[-1] < expiry:
        more = times[-1] + np.cumsum(rng.exponentials(rate, chunk))
        times = np.concatenate([times, more])
    return times[: np.searchsorted(times, expiry, side="left")]


def pareto_sample(shape: float, scale: float, rng: RngStream) -> float:
    return scale * rng.uniform() ** (-1.0 / shape)


def pareto_mean(shape: float, scale: float) -> float:
    return shape * scale / (shape - 1.0)


def pareto_scales(shape: float, burst: float, idle: float, rate: float) -> tuple[float, float]:
    """Scale parameters ``(m_on in packets, m_off in seconds)`` giving the requested means."""
    if not shape > 1:
        raise ProfileError(f"Pareto shape must exceed 1, got {shape}")
    n_on = burst * rate
    factor = (shape - 1.0) / shape
    return n_on * factor, idle * factor


def on_off_periods(
    shape: float, m_on: float, m_off: float, rng: RngStream
) -> Iterator[tuple[int, float]]:
    """Endless ``(burst packets, idle seconds)`` pairs."""
    while True:
        packets = max(1, math.ceil(pareto_sample(shape, m_on, rng)))
        yield packets, pareto_sample(shape, m_off, rng)


def on_off_packet_schedule(
    arrival: float,
    expiry: float,
    rate: float,
    shape: float,
    m_on: float,
    m_off: float,
    rng: RngStream,
) -> np.ndarray:
    """Emission times of one On/Off flow; the first burst starts at ``arrival``."""
    spacing = 1.0 / rate
    times: list[float] = []
    start = arrival
    for packets, idle in on_off_periods(shape, m_on, m_off, rng):
        for j in range(packets):
            t = start + j * spacing
            if t >= expiry:
                return np.asarray(times)
            times.append(t)
        start += packets * spacing + idle
        if start >= expiry:
            return np.asarray(times)
    raise AssertionError("unreachable")


class FlowSource:
    """Poisson flow arrivals at one switch, each carrying its packet schedule."""

    def __init__(self, profile: TrafficProfile, switch: int, seed: int, run: int):
        self.profile = profile
        self.switch = switch
        self.params = profile.switches[switch]
        self.arrival_rng = RngStream(seed, run, switch, "arrivals")
        self.packet_rng = RngStream(seed, run, switch, "packets")
        if profile.process == PARETO:
            self.m_on, self.m_off = pareto_scales(
                profile.shape, self.params.burst, self.params.idle, self.params.packet_rate
            )

    def next_arrival(self, now: float) -> float:
        return now + next_flow_interarrival(self.params.flow_rate, self.arrival_rng)

    def make_flow(self, flow_id: int, arrival: float) -> Flow:
        expiry = arrival + self.profile.ttl
        rate = self.params.packet_rate
        if self.profile.process == POISSON:
            emissions = poisson_packet_schedule(arrival, expiry, rate, self.packet_rng)
        else:
            emissions = on_off_packet_schedule(
                arrival, expiry, rate, self.profile.shape, self.m_on, self.m_off, self.packet_rng
            )
        return Flow(flow_id, self.switch, arrival, expiry, emissions)
