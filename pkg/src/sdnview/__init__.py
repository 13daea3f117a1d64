"""Event-driven and recurrence models of SDN load balancing under stale controller views."""

from .controlplane import Collection, CollectionPolicy, Distribution, DistributionPolicy, lb_decide
from .dataplane import Topology
from .harness import run_scenario, run_sweep
from .metrics import MetricSample, aggregate, sigma, xi
from .model import LagPolicy, run_model
from .network import NetworkSimulation, SimConfig
from .profiles import build_profile
from .scenario import Scenario, load_scenario

__all__ = [
    "Collection", "CollectionPolicy", "Distribution", "DistributionPolicy", "LagPolicy",
    "MetricSample", "NetworkSimulation", "Scenario", "SimConfig", "Topology", "aggregate",
    "build_profile", "lb_decide", "load_scenario", "run_model", "run_scenario", "run_sweep",
    "sigma", "xi",
]
