"""Bundled traffic parameter sets.

``simple-*`` and ``pareto-*`` are the two-switch low/high-variation loads.
``scale-*`` hold the per-switch vectors used when sweeping the number of
controllers (2 to 4 domains); their first two entries agree with the
two-switch Poisson loads.
"""

from __future__ import annotations

from .traffic import PARETO, POISSON, ProfileError, SwitchTraffic, TrafficProfile

FLOW_RATES = {
    "lv": (6.0, 4.0, 5.0, 4.0),
    "hv": (8.0, 2.0, 4.0, 6.0),
}
PACKET_RATES = {
    "lv": (34.0, 30.0, 32.0, 28.0),
    "hv": (48.0, 16.0, 32.0, 20.0),
}
# Two-switch On/Off means (burst, idle) in seconds.
ON_OFF_2 = {
    "lv": ((0.6, 0.4), (0.4, 0.6)),
    "hv": ((0.8, 0.2), (0.2, 0.8)),
}
# Multi-controller On/Off means, same for both variations.
ON_OFF_SCALE = ((0.6, 0.4), (0.4, 0.6), (0.5, 0.5), (0.8, 0.2))

PROFILE_NAMES = (
    "simple-lv",
    "simple-hv",
    "pareto-lv",
    "pareto-hv",
    "scale-simple-lv",
    "scale-simple-hv",
    "scale-pareto-lv",
    "scale-pareto-hv",
)


def build_profile(name: str, domains: int) -> TrafficProfile:
    """Resolve a bundled profile for ``domains`` switches."""
    if name not in PROFILE_NAMES:
        raise ProfileError(f"unknown traffic profile {name!r}")
    scaled = name.startswith("scale-")
    limit = 4 if scaled else 2
    if not 1 <= domains <= limit:
        raise ProfileError(f"profile {name!r} is defined for 1..{limit} domains, not {domains}")
    base = name.removeprefix("scale-")
    process, variation = base.split("-")
    switches = []
    for k in range(domains):
        burst = idle = 0.0
        if process == "pareto":
            burst, idle = ON_OFF_SCALE[k] if scaled else ON_OFF_2[variation][k]
        switches.append(
            SwitchTraffic(FLOW_RATES[variation][k], PACKET_RATES[variation][k], burst, idle)
        )
    return TrafficProfile(
        name=name,
        switches=tuple(switches),
        process=PARETO if process == "pareto" else POISSON,
    )
