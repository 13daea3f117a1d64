"""Controllers, their views of server load, and the least-loaded balancer.

Passive collection counts flow rules a controller sees installed and expired
at its own switches; active collection copies byte counters from its own
switches every polling period. Remote entries only change when controllers
exchange views, either periodically or, under LSVS, when the load of the
agreed least-loaded server drifts past a threshold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .dataplane import DataPlane, Topology
from .traffic import Flow


class Collection(str, enum.Enum):
    PASSIVE = "passive"
    ACTIVE = "active"


class Distribution(str, enum.Enum):
    NONE = "none"
    PERIODIC = "periodic"
    LSVS = "lsvs"


class Role(str, enum.Enum):
    ACTIVE = "active"
    PASSIVE = "passive"


@dataclass(frozen=True)
class CollectionPolicy:
    kind: Collection = Collection.PASSIVE
    poll: float = 1.0

    def __post_init__(self) -> None:
        if self.kind is Collection.ACTIVE and not self.poll > 0:
            raise ValueError(f"polling period must be > 0, got {self.poll}")


@dataclass(frozen=True)
class DistributionPolicy:
    kind: Distribution = Distribution.NONE
    sync: float = math.inf
    threshold: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is Distribution.PERIODIC and not self.sync > 0:
            raise ValueError(f"sync period must be > 0, got {self.sync}")
        if self.kind is Distribution.LSVS and not self.threshold >= 0:
            raise ValueError(f"LSVS threshold must be >= 0, got {self.threshold}")


@dataclass
class ControllerView:
    controller: int
    loads: list[float]
    as_of: list[float]
    local: tuple[int, ...]
    role: Role = Role.PASSIVE
    least_loaded: int = 0
    last_sync_load: float = 0.0

    @classmethod
    def empty(cls, controller: int, n_servers: int, local: Sequence[int]) -> "ControllerView":
        return cls(controller, [0.0] * n_servers, [0.0] * n_servers, tuple(local))


def lb_decide(loads: Sequence[float]) -> int:
    """Index of the smallest load; the lowest index wins ties."""
    if not loads:
        raise ValueError("cannot balance over an empty view")
    best = 0
    lmin = loads[0]
    for k in range(1, len(loads)):
        if loads[k] < lmin:
            lmin = loads[k]
            best = k
    return best


@dataclass
class ControlPlane:
    topology: Topology
    dataplane: DataPlane
    collection: CollectionPolicy = field(default_factory=CollectionPolicy)
    distribution: DistributionPolicy = field(default_factory=DistributionPolicy)

    def __post_init__(self) -> None:
        n = self.topology.domains
        self.views = [
            ControllerView.empty(c, n, self.topology.domain_servers(c))
            for c in self.topology.controllers
        ]
        self.sync_messages = 0
        self.lsvs_triggers = 0
        if self.distribution.kind is Distribution.LSVS:
            # Server 0 is the agreed least-loaded server until the first trigger.
            owner = self.owner(0)
            for view in self.views:
                view.least_loaded = 0
                view.last_sync_load = 0.0
                view.role = Role.ACTIVE if view.controller == owner else Role.PASSIVE

    @property
    def passive(self) -> bool:
        return self.collection.kind is Collection.PASSIVE

    @property
    def lsvs(self) -> bool:
        return self.distribution.kind is Distribution.LSVS

    def owner(self, server: int) -> int:
        return self.topology.controller_of(server)

    def active_controller(self) -> ControllerView:
        (view,) = [v for v in self.views if v.role is Role.ACTIVE]
        return view

    # -- load balancing ----------------------------------------------------

    def decide(self, controller: int) -> int:
        view = self.views[controller]
        if self.lsvs:
            return view.least_loaded
        return lb_decide(view.loads)

    def on_flow_arrival(self, flow: Flow, now: float) -> int:
        controller = self.topology.controller_of(flow.origin)
        server = self.decide(controller)
        self.dataplane.install_flow(flow, server)
        if self.passive:
            self._passive_update(server, +1, now)
        return server

    def on_flow_expiry(self, flow: Flow, now: float) -> None:
        if self.passive:
            self._passive_update(flow.server, -1, now)

    def _passive_update(self, server: int, delta: int, now: float) -> None:
        # The rule toward a server is installed on (and removed from) that
        # server's own switch, so its owner always tracks it.
        view = self.views[self.owner(server)]
        view.loads[server] += delta
        view.as_of[server] = now
        if self.lsvs and view.role is Role.ACTIVE and server == view.least_loaded:
            self.lsvs_check(now)

    # -- collection --------------------------------------------------------

    def on_poll_tick(self, controller: int, now: float) -> None:
        view = self.views[controller]
        for server in view.local:
            self.dataplane.deliver_server(server, now, inclusive=False)
            _, nbytes = self.dataplane.read_counters(server)
            view.loads[server] = float(nbytes)
            view.as_of[server] = now
        if self.lsvs and view.role is Role.ACTIVE:
            self.lsvs_check(now)

    # -- distribution ------------------------------------------------------

    def exchange(self, now: float) -> None:
        """Every controller copies each remote server's entry from its owner."""
        owned = {}
        for view in self.views:
            for server in view.local:
                owned[server] = (view.loads[server], view.as_of[server])
        for view in self.views:
            for server, (load, as_of) in owned.items():
                if server not in view.local:
                    view.loads[server] = load
                    view.as_of[server] = as_of
        c = len(self.views)
        self.sync_messages += c * (c - 1)

    def on_sync_tick(self, now: float) -> None:
        self.exchange(now)

    def lsvs_check(self, now: float) -> bool:
        active = self.active_controller()
        current = active.loads[active.least_loaded]
        if not abs(current - active.last_sync_load) > self.distribution.threshold:
            return False
        self.lsvs_triggers += 1
        self.exchange(now)
        # After the exchange every view is identical.
        least = lb_decide(active.loads)
        new_owner = self.owner(least)
        load = active.loads[least]
        for view in self.views:
            view.least_loaded = least
            view.last_sync_load = load
            view.role = Role.ACTIVE if view.controller == new_owner else Role.PASSIVE
        return True
