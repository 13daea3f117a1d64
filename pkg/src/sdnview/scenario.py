"""Scenario files: INI-style sections of ``key = value`` pairs.

Example::

    [scenario]
    name = fig5-simple-lv-DP
    engine = sim
    horizon = 300
    runs = 10
    seed = 1

    [topology]
    domains = 2

    [traffic]
    profile = simple-lv

    [collection]
    kind = passive

    [distribution]
    kind = periodic
    sync = 1

    [sweep]
    parameter = sync
    values = 1 2 4 8 16 32
"""

from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .controlplane import Collection, CollectionPolicy, Distribution, DistributionPolicy
from .dataplane import Topology
from .model import PERIODIC, SLIDING
from .profiles import PROFILE_NAMES, build_profile
from .traffic import PARETO, POISSON, ProfileError, SwitchTraffic, TrafficProfile

ENGINES = ("sim", "model")
SWEEP_PARAMETERS = ("sync", "poll", "threshold", "controllers")
SCENARIO_SUFFIX = ".scn"


class ScenarioError(ValueError):
    def __init__(self, message: str, source: str = "<scenario>", line: int | None = None):
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class TrafficSpec:
    """A named profile plus optional overrides, resolved per domain count."""

    profile: str = "simple-lv"
    overrides: tuple[tuple[str, str], ...] = ()

    def build(self, domains: int) -> TrafficProfile:
        opts = dict(self.overrides)
        if self.profile == "custom":
            base = None
        else:
            base = build_profile(self.profile, domains)
        process = opts.get("process", base.process if base else POISSON)

        def vector(key: str, attr: str) -> list[float]:
            if key in opts:
                values = [float(x) for x in opts[key].split()]
                if len(values) < domains:
                    raise ProfileError(f"{key} lists {len(values)} values for {domains} domains")
                return values[:domains]
            if base is None:
                if attr in ("burst", "idle") and process == POISSON:
                    return [0.0] * domains
                raise ProfileError(f"custom profile needs {key}")
            return [getattr(sw, attr) for sw in base.switches]

        flow_rates = vector("flow_rates", "flow_rate")
        packet_rates = vector("packet_rates", "packet_rate")
        bursts = vector("bursts", "burst")
        idles = vector("idles", "idle")
        return TrafficProfile(
            name=self.profile,
            switches=tuple(
                SwitchTraffic(flow_rates[k], packet_rates[k], bursts[k], idles[k])
                for k in range(domains)
            ),
            process=process,
            ttl=float(opts.get("ttl", base.ttl if base else 2.0)),
            payload=int(opts.get("payload", base.payload if base else 4096)),
            shape=float(opts.get("shape", base.shape if base else 1.5)),
        )


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    average_over_sync: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"cannot sweep {self.parameter!r}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(not v > 0 for v in self.values):
            raise ValueError("swept values must be positive")


@dataclass(frozen=True)
class Scenario:
    name: str
    engine: str = "sim"
    domains: int = 2
    single_controller: bool = False
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    collection: CollectionPolicy = field(default_factory=CollectionPolicy)
    distribution: DistributionPolicy = field(default_factory=DistributionPolicy)
    horizon: float = 300.0
    window: float = 2.0
    smoothing: float = 0.0
    runs: int = 10
    seed: int = 1
    lag_mode: str = PERIODIC
    sweep: SweepSpec | None = None
    description: str = ""

    def __post_init__(self) -> None:
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, not {self.engine!r}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be > 0, got {self.horizon}")
        if not self.window > 0:
            raise ValueError(f"window must be > 0, got {self.window}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.domains < 1:
            raise ValueError(f"domains must be >= 1, got {self.domains}")
        if self.lag_mode not in (PERIODIC, SLIDING):
            raise ValueError(f"lag_mode must be {PERIODIC!r} or {SLIDING!r}")
        if self.engine == "model" and self.distribution.kind is Distribution.LSVS:
            raise ValueError("the recurrence model has no LSVS variant")
        if (self.single_controller or self.domains == 1) and \
                self.distribution.kind is not Distribution.NONE:
            raise ValueError("state distribution needs more than one controller")
        self.profile()

    @property
    def topology(self) -> Topology:
        return Topology(self.domains, self.single_controller)

    def profile(self) -> TrafficProfile:
        return self.traffic.build(self.domains)

    def with_value(self, parameter: str, value: float) -> "Scenario":
        if parameter == "sync":
            if self.distribution.kind is not Distribution.PERIODIC:
                raise ValueError("sync sweep needs periodic distribution")
            return dataclasses.replace(
                self, distribution=dataclasses.replace(self.distribution, sync=float(value)))
        if parameter == "poll":
            if self.collection.kind is not Collection.ACTIVE:
                raise ValueError("poll sweep needs active collection")
            return dataclasses.replace(
                self, collection=dataclasses.replace(self.collection, poll=float(value)))
        if parameter == "threshold":
            if self.distribution.kind is not Distribution.LSVS:
                raise ValueError("threshold sweep needs LSVS distribution")
            return dataclasses.replace(
                self, distribution=dataclasses.replace(self.distribution, threshold=float(value)))
        if parameter == "controllers":
            if int(value) != value:
                raise ValueError("controller count must be an integer")
            return dataclasses.replace(self, domains=int(value))
        raise ValueError(f"cannot sweep {parameter!r}")


# -- parsing ---------------------------------------------------------------

_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _locate(text: str) -> dict[tuple[str, str | None], int]:
    lines: dict[tuple[str, str | None], int] = {}
    section = ""
    for number, line in enumerate(text.splitlines(), start=1):
        m = _SECTION.match(line)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, None), number)
            continue
        m = _KEY.match(line)
        if m and section:
            lines.setdefault((section, m.group(1).strip().lower()), number)
    return lines


KNOWN_KEYS = {
    "scenario": {"name", "description", "engine", "horizon", "window", "smoothing", "runs", "seed"},
    "topology": {"domains", "single_controller"},
    "traffic": {"profile", "process", "ttl", "payload", "shape", "flow_rates", "packet_rates",
                "bursts", "idles"},
    "collection": {"kind", "poll"},
    "distribution": {"kind", "sync", "threshold"},
    "model": {"lag_mode"},
    "sweep": {"parameter", "values", "average_over_sync"},
}


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ScenarioError("cannot parse line", source, line) from exc
    except configparser.Error as exc:
        raise ScenarioError(exc.message.splitlines()[0], source, getattr(exc, "lineno", None)) from exc

    where = _locate(text)

    def fail(message: str, section: str, key: str | None = None) -> ScenarioError:
        line = where.get((section, key)) or where.get((section, None))
        return ScenarioError(message, source, line)

    for section in parser.sections():
        if section not in KNOWN_KEYS:
            raise fail(f"unknown section [{section}]", section)
        for key in parser[section]:
            if key not in KNOWN_KEYS[section]:
                raise fail(f"unknown key {key!r} in [{section}]", section, key)

    def get(section: str, key: str, convert=str, default=None):
        if not parser.has_option(section, key):
            if default is None:
                raise fail(f"missing {key!r} in [{section}]", section)
            return default
        raw = parser.get(section, key)
        try:
            if convert is bool:
                return parser.getboolean(section, key)
            return convert(raw)
        except ValueError:
            raise fail(f"bad value {raw!r} for {key!r}", section, key) from None

    def floats(raw: str) -> tuple[float, ...]:
        return tuple(float(x) for x in raw.replace(",", " ").split())

    if not parser.has_section("scenario"):
        raise ScenarioError("missing [scenario] section", source, 1)
    if not parser.has_section("traffic") or not parser.has_option("traffic", "profile"):
        raise fail("missing traffic profile ('profile' in [traffic])", "traffic")
    profile_name = parser.get("traffic", "profile")
    if profile_name != "custom" and profile_name not in PROFILE_NAMES:
        raise fail(f"unknown traffic profile {profile_name!r}", "traffic", "profile")
    overrides = tuple(
        (k, v) for k, v in parser.items("traffic") if k != "profile"
    )

    coll_kind = get("collection", "kind", Collection, Collection.PASSIVE) \
        if parser.has_section("collection") else Collection.PASSIVE
    dist_kind = get("distribution", "kind", Distribution, Distribution.NONE) \
        if parser.has_section("distribution") else Distribution.NONE

    try:
        collection = CollectionPolicy(
            coll_kind,
            get("collection", "poll", float, 1.0) if parser.has_section("collection") else 1.0,
        )
    except ValueError as exc:
        raise fail(str(exc), "collection", "poll") from None
    has_dist = parser.has_section("distribution")
    try:
        distribution = DistributionPolicy(
            dist_kind,
            get("distribution", "sync", float, math.inf) if has_dist else math.inf,
            get("distribution", "threshold", float, 0.0) if has_dist else 0.0,
        )
    except ValueError as exc:
        key = "sync" if dist_kind is Distribution.PERIODIC else "threshold"
        raise fail(str(exc), "distribution", key) from None

    sweep = None
    if parser.has_section("sweep"):
        try:
            sweep = SweepSpec(
                get("sweep", "parameter"),
                floats(get("sweep", "values")),
                floats(get("sweep", "average_over_sync", str, "")),
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise fail(str(exc), "sweep", "values") from None

    fields = dict(
        name=get("scenario", "name", str, Path(source).stem),
        description=get("scenario", "description", str, ""),
        engine=get("scenario", "engine", str, "sim"),
        horizon=get("scenario", "horizon", float, 300.0),
        window=get("scenario", "window", float, 2.0),
        smoothing=get("scenario", "smoothing", float, 0.0),
        runs=get("scenario", "runs", int, 10),
        seed=get("scenario", "seed", int, 1),
        domains=get("topology", "domains", int, 2) if parser.has_section("topology") else 2,
        single_controller=get("topology", "single_controller", bool, False)
        if parser.has_section("topology") else False,
        traffic=TrafficSpec(profile_name, overrides),
        collection=collection,
        distribution=distribution,
        lag_mode=get("model", "lag_mode", str, PERIODIC) if parser.has_section("model") else PERIODIC,
        sweep=sweep,
    )
    # Map invariant failures back to the key that caused them.
    blame = {
        "sweep": ("sweep", "parameter"), "controller count": ("sweep", "values"),
        "engine": ("scenario", "engine"), "horizon": ("scenario", "horizon"),
        "window": ("scenario", "window"), "runs": ("scenario", "runs"),
        "domains": ("topology", "domains"), "lag_mode": ("model", "lag_mode"),
        "LSVS": ("distribution", "kind"), "distribution": ("distribution", "kind"),
        "profile": ("traffic", "profile"), "switch": ("traffic", "profile"),
    }
    try:
        scenario = Scenario(**fields)
        if sweep is not None:
            for value in sweep.values:
                scenario.with_value(sweep.parameter, value).profile()
    except (ValueError, ProfileError) as exc:
        message = str(exc)
        for word, (section, key) in blame.items():
            if word in message:
                raise fail(message, section, key) from None
        raise fail(message, "scenario") from None
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario from a file path or the name of a bundled scenario."""
    p = Path(path)
    if not p.exists():
        bundled = bundled_path(str(path))
        if bundled is None:
            raise ScenarioError("no such scenario file", str(path))
        p = bundled
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read: {exc.strerror}", str(p)) from None
    return parse_scenario(text, str(p))


def bundled_dir() -> Path:
    return Path(str(resources.files("sdnview") / "scenarios"))


def bundled_scenarios() -> list[Path]:
    return sorted(bundled_dir().glob(f"*{SCENARIO_SUFFIX}"))


def bundled_path(name: str) -> Path | None:
    stem = name.removesuffix(SCENARIO_SUFFIX)
    candidate = bundled_dir() / f"{stem}{SCENARIO_SUFFIX}"
    return candidate if candidate.exists() else None
