"""One event-driven simulation run of the SDN load balancer."""

from __future__ import annotations

from dataclasses import dataclass, field

from .controlplane import (
    Collection,
    CollectionPolicy,
    ControlPlane,
    Distribution,
    DistributionPolicy,
)
from .dataplane import DataPlane, Topology
from .metrics import MetricSample, sample_from
from .simcore import EventKind, SimEvent, Simulator
from .traffic import Flow, FlowSource, TrafficProfile


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class SimConfig:
    topology: Topology
    profile: TrafficProfile
    collection: CollectionPolicy = field(default_factory=CollectionPolicy)
    distribution: DistributionPolicy = field(default_factory=DistributionPolicy)
    horizon: float = 300.0
    window: float = 2.0

    def __post_init__(self) -> None:
        if self.profile.size != self.topology.domains:
            raise ValueError(
                f"profile {self.profile.name!r} has {self.profile.size} switches, "
                f"topology has {self.topology.domains} domains"
            )
        if not self.horizon > 0 or not self.window > 0:
            raise ValueError("horizon and window must be positive")
        if (self.topology.single_controller or self.topology.domains == 1) and \
                self.distribution.kind is not Distribution.NONE:
            raise ValueError("state distribution needs more than one controller")


@dataclass
class TraceRow:
    time: float
    flows: tuple[int, ...]
    active_bytes: tuple[int, ...]
    cumulative_bytes: tuple[int, ...]


class NetworkSimulation:
    """Drives flows through the data plane and the controllers for one seeded run.

    With ``packet_events`` every packet is its own event; otherwise packets
    are credited lazily whenever counters are observed (polls, expiries and
    measurement ticks), which gives identical counters at those instants.
    """

    def __init__(
        self,
        config: SimConfig,
        seed: int,
        run: int = 0,
        *,
        packet_events: bool = False,
        check_invariants: bool = False,
        record_trace: bool = False,
    ):
        self.config = config
        self.seed = seed
        self.run_index = run
        self.packet_events = packet_events
        self.check_invariants = check_invariants
        self.record_trace = record_trace

        self.sim = Simulator()
        self.dataplane = DataPlane(config.topology, config.profile.payload)
        self.control = ControlPlane(
            config.topology, self.dataplane, config.collection, config.distribution
        )
        self.sources = [
            FlowSource(config.profile, k, seed, run) for k in range(config.topology.domains)
        ]
        self.samples: list[MetricSample] = []
        self.flows: list[Flow] = []
        self.trace: list[TraceRow] = []
        self._next_flow_id = 0

        on = self.sim.on
        on(EventKind.FLOW_ARRIVAL, self._on_arrival)
        on(EventKind.FLOW_EXPIRY, self._on_expiry)
        on(EventKind.PACKET_EMISSION, self._on_packet)
        on(EventKind.POLL_TICK, self._on_poll)
        on(EventKind.SYNC_TICK, self._on_sync)
        on(EventKind.MEASURE_TICK, self._on_measure)

    def run(self) -> list[MetricSample]:
        cfg = self.config
        for k, source in enumerate(self.sources):
            self.sim.schedule(source.next_arrival(0.0), EventKind.FLOW_ARRIVAL, k)
        if cfg.collection.kind is Collection.ACTIVE:
            for c in cfg.topology.controllers:
                self.sim.schedule(0.0, EventKind.POLL_TICK, (c, 0))
        if cfg.distribution.kind is Distribution.PERIODIC:
            self.sim.schedule(cfg.distribution.sync, EventKind.SYNC_TICK, 1)
        self.sim.schedule(cfg.window, EventKind.MEASURE_TICK, 1)
        self.sim.run_until(cfg.horizon)
        return self.samples

    # -- handlers ----------------------------------------------------------

    def _on_arrival(self, event: SimEvent) -> None:
        k = event.payload
        now = event.time
        source = self.sources[k]
        flow = source.make_flow(self._next_flow_id, now)
        self._next_flow_id += 1
        self.flows.append(flow)
        self.control.on_flow_arrival(flow, now)
        self.sim.schedule(flow.expiry, EventKind.FLOW_EXPIRY, flow)
        if self.packet_events and flow.packet_count:
            self.sim.schedule(float(flow.emissions[0]), EventKind.PACKET_EMISSION, flow)
        self.sim.schedule(source.next_arrival(now), EventKind.FLOW_ARRIVAL, k)

    def _on_packet(self, event: SimEvent) -> None:
        flow: Flow = event.payload
        index = flow.sent
        self.dataplane.on_packet(flow)
        if index + 1 < flow.packet_count:
            self.sim.schedule(float(flow.emissions[index + 1]), EventKind.PACKET_EMISSION, flow)

    def _on_expiry(self, event: SimEvent) -> None:
        flow: Flow = event.payload
        self.dataplane.expire_flow(flow)
        self.control.on_flow_expiry(flow, event.time)

    def _on_poll(self, event: SimEvent) -> None:
        controller, n = event.payload
        self.control.on_poll_tick(controller, event.time)
        period = self.config.collection.poll
        self.sim.schedule((n + 1) * period, EventKind.POLL_TICK, (controller, n + 1))

    def _on_sync(self, event: SimEvent) -> None:
        n = event.payload
        self.control.on_sync_tick(event.time)
        self.sim.schedule((n + 1) * self.config.distribution.sync, EventKind.SYNC_TICK, n + 1)

    def _on_measure(self, event: SimEvent) -> None:
        n = event.payload
        now = event.time
        dp = self.dataplane
        dp.deliver_all(now)
        if self.check_invariants:
            self._check(now)
        if self.record_trace:
            self.trace.append(TraceRow(
                now,
                tuple(s.flows for s in dp.servers),
                tuple(s.active_bytes for s in dp.servers),
                tuple(s.cumulative_bytes for s in dp.servers),
            ))
        flows = [s.flows for s in dp.servers]
        self.samples.append(sample_from(now, flows, dp.take_window_bytes()))
        self.sim.schedule((n + 1) * self.config.window, EventKind.MEASURE_TICK, n + 1)

    def _check(self, now: float) -> None:
        dp = self.dataplane
        total_flows = sum(s.flows for s in dp.servers)
        if total_flows != len(dp.active):
            raise InvariantViolation(
                f"t={now}: servers count {total_flows} flows, {len(dp.active)} are active"
            )
        total_bytes = sum(s.cumulative_bytes for s in dp.servers)
        if total_bytes != dp.payload * dp.delivered_packets:
            raise InvariantViolation(
                f"t={now}: servers received {total_bytes} B, "
                f"{dp.delivered_packets} packets delivered"
            )
        if self.config.collection.kind is Collection.PASSIVE:
            for view in self.control.views:
                for server in view.local:
                    if view.loads[server] != dp.servers[server].flows:
                        raise InvariantViolation(
                            f"t={now}: controller {view.controller} tracks "
                            f"{view.loads[server]} flows on its server {server}, "
                            f"truth is {dp.servers[server].flows}"
                        )
