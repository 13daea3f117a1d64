"""Switches, servers and ground-truth per-server counters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .traffic import Flow

# Link capacities in Mb/s; recorded only, never enforced.
CORE_LINK_MBPS = 1000
EDGE_LINK_MBPS = 100


class DataPlaneError(RuntimeError):
    pass


@dataclass(frozen=True)
class Topology:
    """``domains`` domains, each with one switch, one server and one controller.

    In single-controller mode a single controller (id 0) manages every switch.
    """

    domains: int
    single_controller: bool = False
    core_link_mbps: int = CORE_LINK_MBPS
    edge_link_mbps: int = EDGE_LINK_MBPS

    def __post_init__(self) -> None:
        if self.domains < 1:
            raise ValueError(f"need at least one domain, got {self.domains}")

    @property
    def servers(self) -> range:
        return range(self.domains)

    @property
    def controllers(self) -> range:
        return range(1 if self.single_controller else self.domains)

    def controller_of(self, domain: int) -> int:
        return 0 if self.single_controller else domain

    def domain_servers(self, controller: int) -> tuple[int, ...]:
        if self.single_controller:
            return tuple(self.servers)
        return (controller,)


@dataclass(slots=True)
class ServerLoad:
    server: int
    flows: int = 0
    active_bytes: int = 0
    cumulative_bytes: int = 0
    window_bytes: int = 0


@dataclass
class DataPlane:
    """Ground truth: which flows are active where and how many bytes servers received.

    Packets can be delivered one at a time through :meth:`on_packet`, or
    lazily through :meth:`deliver`, which credits every pending emission of a
    flow up to a given instant. Counters read after a delivery are the same
    either way.
    """

    topology: Topology
    payload: int
    servers: list[ServerLoad] = field(init=False)
    active: dict[int, Flow] = field(init=False, default_factory=dict)
    delivered_packets: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.servers = [ServerLoad(k) for k in self.topology.servers]
        self._by_server: list[dict[int, Flow]] = [{} for _ in self.topology.servers]

    def _check_server(self, server: int) -> ServerLoad:
        if not 0 <= server < len(self.servers):
            raise DataPlaneError(f"unknown server {server}")
        return self.servers[server]

    def install_flow(self, flow: Flow, server: int) -> None:
        load = self._check_server(server)
        if flow.server is not None or flow.id in self.active:
            raise DataPlaneError(f"flow {flow.id} is already assigned to server {flow.server}")
        flow.server = server
        load.flows += 1
        self.active[flow.id] = flow
        self._by_server[server][flow.id] = flow

    def on_packet(self, flow: Flow, payload: int | None = None) -> bool:
        """Credit one packet; returns False if the flow is no longer active."""
        if flow.id not in self.active:
            return False
        self._credit(flow, 1, self.payload if payload is None else payload)
        return True

    def _credit(self, flow: Flow, packets: int, payload: int) -> None:
        nbytes = packets * payload
        flow.sent += packets
        flow.bytes_sent += nbytes
        load = self.servers[flow.server]
        load.active_bytes += nbytes
        load.cumulative_bytes += nbytes
        load.window_bytes += nbytes
        self.delivered_packets += packets

    def deliver(self, flow: Flow, until: float, inclusive: bool = True) -> None:
        side = "right" if inclusive else "left"
        due = int(np.searchsorted(flow.emissions, until, side=side))
        if due > flow.sent:
            self._credit(flow, due - flow.sent, self.payload)

    def deliver_server(self, server: int, until: float, inclusive: bool = True) -> None:
        for flow in self._by_server[server].values():
            self.deliver(flow, until, inclusive)

    def deliver_all(self, until: float, inclusive: bool = True) -> None:
        for flow in self.active.values():
            self.deliver(flow, until, inclusive)

    def expire_flow(self, flow: Flow) -> None:
        if self.active.pop(flow.id, None) is None:
            raise DataPlaneError(f"flow {flow.id} is not active")
        # Every emission lies strictly before expiry.
        self.deliver(flow, flow.expiry, inclusive=False)
        del self._by_server[flow.server][flow.id]
        load = self.servers[flow.server]
        load.flows -= 1
        load.active_bytes -= flow.bytes_sent

    def read_counters(self, server: int) -> tuple[int, int]:
        load = self._check_server(server)
        return load.flows, load.active_bytes

    def flows_on(self, server: int) -> list[Flow]:
        return list(self._by_server[server].values())

    def take_window_bytes(self) -> list[int]:
        out = [s.window_bytes for s in self.servers]
        for s in self.servers:
            s.window_bytes = 0
        return out
