"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Runs at desk scale (300 simulated seconds, 10 runs, base seed 1). The lines
are repeated in the terminal summary; ``python tests/test_acceptance.py``
prints them without pytest.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import random
import sys

import numpy as np
import pytest
from scipy.stats import spearmanr

from oracles import replay
from sdnview.controlplane import Collection, CollectionPolicy, Distribution, DistributionPolicy
from sdnview.dataplane import Topology
from sdnview.harness import emit_run, emit_sweep, run_scenario, run_sweep
from sdnview.model import ModelState, step_sigma, step_xi
from sdnview.network import NetworkSimulation, SimConfig
from sdnview.profiles import build_profile
from sdnview.scenario import bundled_scenarios, load_scenario
from sdnview.simcore import RngStream
from sdnview.traffic import on_off_periods, pareto_sample, pareto_scales

REPORT: list[str] = []


def record(label: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    REPORT.append(line)
    print(line)
    assert ok, line


def rounded(values, digits=3):
    return "[" + ", ".join(f"{v:.{digits}f}" for v in values) + "]"


@functools.lru_cache(maxsize=None)
def sweep(name: str, metric: str) -> tuple[float, ...]:
    return tuple(run_sweep(load_scenario(name)).metric(metric))


def rho(xs, ys) -> float:
    return float(spearmanr(xs, ys).statistic)


GRID = (1, 2, 4, 8, 16, 32)


# 1 -------------------------------------------------------------------------

def test_c01_conservation_all_bundled():
    checked = 0
    for path in bundled_scenarios():
        base = dataclasses.replace(load_scenario(path), engine="sim", runs=1)
        variants = [base]
        if base.sweep is not None:
            variants = [base.with_value(base.sweep.parameter, v) for v in base.sweep.values]
            if base.sweep.average_over_sync:
                variants = [v.with_value("sync", s)
                            for v in variants for s in base.sweep.average_over_sync]
        for scenario in variants:
            config = SimConfig(scenario.topology, scenario.profile(), scenario.collection,
                               scenario.distribution, scenario.horizon, scenario.window)
            # Raises InvariantViolation on the first tick where an integer identity breaks.
            sim = NetworkSimulation(config, scenario.seed, check_invariants=True)
            checked += len(sim.run())
    record("C1  conservation", True,
           f"{len(bundled_scenarios())} bundled scenarios, {checked} ticks, "
           "sum f = active flows and sum cumulative = payload x delivered at every tick")


# 2 -------------------------------------------------------------------------

def test_c02_replay_oracle():
    cases = [
        (True, CollectionPolicy(), DistributionPolicy()),
        (True, CollectionPolicy(Collection.ACTIVE, 1.0), DistributionPolicy()),
        (False, CollectionPolicy(), DistributionPolicy(Distribution.PERIODIC, 2.0)),
        (False, CollectionPolicy(Collection.ACTIVE, 1.0),
         DistributionPolicy(Distribution.PERIODIC, 4.0)),
        (False, CollectionPolicy(), DistributionPolicy(Distribution.LSVS, threshold=1)),
    ]
    traces = mismatches = 0
    largest = 0
    for profile in ("simple-lv", "simple-hv", "pareto-lv", "pareto-hv"):
        for single, coll, dist in cases:
            for seed in (1, 2):
                config = SimConfig(Topology(2, single), build_profile(profile, 2), coll, dist,
                                   horizon=8.0, window=0.5)
                sim = NetworkSimulation(config, seed, record_trace=True)
                sim.run()
                assert len(sim.flows) <= 100
                largest = max(largest, len(sim.flows))
                expected = replay(sim.flows, [r.time for r in sim.trace], config.profile.payload,
                                  2, config.window)
                for row, (f, active, cumulative, _) in zip(sim.trace, expected):
                    if (row.flows, row.active_bytes, row.cumulative_bytes) != (f, active, cumulative):
                        mismatches += 1
                traces += 1
    record("C2  replay oracle", mismatches == 0,
           f"{traces} traces (<= {largest} flows each), {mismatches} mismatching ticks")


# 3 -------------------------------------------------------------------------

def test_c03_model_identities():
    rng = random.Random(1)
    s = ModelState.zeros(2)
    identity_breaks = 0
    for _ in range(100_000):
        e = [rng.randint(0, l) if rng.random() < 0.4 else 0 for l in s.loads]
        before = s.total
        s, _ = step_xi(s, e)
        identity_breaks += s.total != before + 1 - sum(e)

    a = b = ModelState.zeros(2)
    worst = 0.0
    for _ in range(100_000):
        e = [rng.randint(0, l) if rng.random() < 0.4 else 0 for l in a.loads]
        a, _ = step_xi(a, e)
        b, sigma = step_sigma(b, e)
        half = abs(a.delta) / 2
        if half:
            worst = max(worst, abs(sigma - half) / half)
        elif sigma:
            worst = math.inf
    ok = identity_breaks == 0 and worst <= 1e-9
    record("C3  model identities", ok,
           f"total recurrence exact over 1e5 steps ({identity_breaks} breaks); "
           f"max |sigma - |delta|/2| relative = {worst:.2e}")


# 4 -------------------------------------------------------------------------

def test_c04_sa_poll_sweep_trend():
    parts, ok = [], True
    for load in ("LV", "HV"):
        values = sweep(f"fig4-{load}-SA", "xi_b")
        r = rho(GRID, values)
        ok &= r >= 0.9
        parts.append(f"{load} xi_b {rounded(values)} rho={r:.3f}")
    record("C4  SA poll-sweep trend (rho >= 0.9)", ok, "; ".join(parts))


# 5 -------------------------------------------------------------------------

def test_c05_dp_sync_sweep_trend():
    parts, ok = [], True
    curves = {}
    for load in ("LV", "HV"):
        for metric in ("xi_b", "xi_f"):
            values = sweep(f"fig5-{load}-DP", metric)
            curves[load, metric] = values
            r = rho(GRID, values)
            ok &= r >= 0.9
            parts.append(f"{load} {metric} {rounded(values)} rho={r:.3f}")
    for metric in ("xi_b", "xi_f"):
        above = [h > l for h, l in zip(curves["HV", metric], curves["LV", metric])]
        ok &= all(above)
        parts.append(f"HV>LV {metric} at {sum(above)}/{len(above)} points")
    record("C5  DP sync-sweep trend (rho >= 0.9, HV > LV)", ok, "; ".join(parts))


# 6 -------------------------------------------------------------------------

def test_c06_dp_beats_da():
    parts, ok = [], True
    for suffix, label in (("", "Simple LV"), ("-pareto", "Pareto LV")):
        dp = sweep(f"fig5-LV-DP{suffix}", "xi_b")
        for p in (1, 2):
            da = sweep(f"fig7-LV-DA-p{p}{suffix}", "xi_b")
            wins = [d < a for s, d, a in zip(GRID, dp, da) if s >= 4]
            ok &= all(wins)
            parts.append(f"{label} DP {rounded(dp[2:])} vs DA p{p} {rounded(da[2:])} "
                         f"({sum(wins)}/{len(wins)})")
    record("C6  DP < DA at sync >= 4 s", ok, "; ".join(parts))


# 7 -------------------------------------------------------------------------

def test_c07_poll_dominates_sync():
    poll = sweep("fig6-LV-DA-s8", "xi_b")
    sync = sweep("fig7-LV-DA-p1", "xi_b")
    poll_range = max(poll) - min(poll)
    sync_range = max(sync) - min(sync)
    record("C7  DA poll range > sync range", poll_range > sync_range,
           f"poll sweep at sync 8 s {rounded(poll)} range {poll_range:.3f}; "
           f"sync sweep at poll 1 s {rounded(sync)} range {sync_range:.3f}")


# 8 -------------------------------------------------------------------------

def test_c08_lsvs_threshold_trend():
    parts, ok = [], True
    for load in ("LV", "HV"):
        dp = sweep(f"fig9-{load}-DP-LSVS", "xi_b")
        theta = load_scenario(f"fig9-{load}-DP-LSVS").sweep.values
        r = rho(theta, dp)
        ok &= r >= 0.8
        parts.append(f"{load} DP-LSVS {rounded(dp)} rho={r:.3f}")
        for p in (1, 2):
            da = sweep(f"fig9-{load}-DA-LSVS-p{p}", "xi_b")
            r = rho(theta, da)
            below = [d < a for d, a in zip(dp, da)]
            ok &= r >= 0.8 and all(below)
            parts.append(f"{load} DA-LSVS p{p} {rounded(da)} rho={r:.3f} "
                         f"DP<DA {sum(below)}/{len(below)}")
    record("C8  LSVS threshold trend (rho >= 0.8, DP < DA)", ok, "; ".join(parts))


# 9 -------------------------------------------------------------------------

def test_c09_scale_trend():
    parts, ok = [], True
    for load in ("LV", "HV"):
        for suffix in ("", "-pareto"):
            for p in (1, 2):
                name = f"fig11-{load}-DA-p{p}{suffix}"
                values = sweep(name, "sigma_b")
                rising = all(b > a for a, b in zip(values, values[1:]))
                ok &= rising
                parts.append(f"{name} {rounded([v / 1e3 for v in values], 1)} kB")
    record("C9  sigma_b rises with C in {2,3,4}", ok, "; ".join(parts))


# 10 ------------------------------------------------------------------------

def test_c10_model_matches_simulator():
    model = sweep("fig2-LV-DP-model", "xi_f")
    sim = sweep("fig5-LV-DP", "xi_f")
    same_order = list(np.argsort(model, kind="stable")) == list(np.argsort(sim, kind="stable"))
    gap = max(abs(m - s) for m, s in zip(model, sim))
    record("C10 model vs simulator, DP Simple LV xi_f", same_order and gap <= 0.1,
           f"model {rounded(model)} sim {rounded(sim)} same ordering={same_order} "
           f"max |diff|={gap:.4f}")


# 11 ------------------------------------------------------------------------

def test_c11_generator_statistics():
    rate = 6.0
    x = RngStream(1, purpose="arrivals").exponentials(rate, 100_000)
    exp_err = abs(x.mean() - 1 / rate) * rate

    shape, scale = 1.5, 0.2
    rng = RngStream(1, purpose="misc")
    y = np.fromiter((pareto_sample(shape, scale, rng) for _ in range(100_000)), float)
    target = shape * scale / (shape - 1)
    par_err = abs(y.mean() - target) / target

    m_on, m_off = pareto_scales(shape, 0.6, 0.4, 34.0)
    periods = on_off_periods(shape, m_on, m_off, RngStream(1, purpose="packets"))
    on = off = 0.0
    for _ in range(10_000):
        packets, idle = next(periods)
        on += packets / 34.0
        off += idle
    duty_err = abs(on / (on + off) - 0.6) / 0.6

    ok = exp_err < 0.02 and par_err < 0.05 and duty_err < 0.05
    record("C11 generator statistics", ok,
           f"exponential mean err {exp_err:.2%} (< 2%); Pareto mean err {par_err:.2%} (< 5%); "
           f"duty cycle err {duty_err:.2%} (< 5%)")


# 12 ------------------------------------------------------------------------

def test_c12_determinism(tmp_path):
    differing = []
    paths = bundled_scenarios()
    for path in paths:
        scenario = dataclasses.replace(load_scenario(path), runs=2)
        outputs = []
        for attempt in ("a", "b"):
            files = emit_run(tmp_path / attempt, scenario, run_scenario(scenario))
            outputs.append([f.read_bytes() for f in files])
        if outputs[0] != outputs[1]:
            differing.append(scenario.name)
    # One complete sweep end to end, including the summary table.
    full = load_scenario("fig5-HV-DP")
    a = emit_sweep(tmp_path / "sa", run_sweep(full))
    b = emit_sweep(tmp_path / "sb", run_sweep(full))
    if [p.read_bytes() for p in a] != [p.read_bytes() for p in b]:
        differing.append(full.name + " (sweep)")
    record("C12 determinism", not differing,
           f"{len(paths)} scenarios re-run with the same seed plus one full sweep; "
           f"differing outputs: {differing or 'none'}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_c")]
    import pathlib
    import tempfile

    failed = 0
    for test in tests:
        try:
            if "tmp_path" in test.__code__.co_varnames[: test.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    test(pathlib.Path(d))
            else:
                test()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
