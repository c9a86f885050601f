"""Acceptance criteria, one test each, at the stated tolerances and time budgets.

Every test prints a single ``criterion N: PASS|FAIL (...)`` line to the
terminal before asserting.  Run on its own with::

    python3 -m pytest tests/test_acceptance.py -v
"""

import functools
import math
import os
import time

import numpy as np
import pytest

import oracles as O
from netgen import random_network, triples
from stampede.dynamics import Complete, DynamicsParams, RandomDensity, advance, init_population, social_forces
from stampede.harness import (
    cmd_compare, cmd_route_run, cmd_swarm_run, cmd_sweep, compare_rows, compare_summary, sweep_rows,
)
from stampede.metrics import polarization, velocity_diameter
from stampede.presets import (
    CONSENSUS_PARAMS, SWEEP_GRID, densification_pair, fleet_pair, hazard_corridor, horizon_sweep_config,
    injection_pair, ridge_scenario, stampede_config, wreck_threshold_scenario,
)
from stampede.routing import HazardFront, advance_hazard, astar_route, run_scenario

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
        return ok
    return emit


# --- 1 ----------------------------------------------------------------------

def test_criterion_1_nomadic_limit(report):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    nonzero, worst = 0, 0.0
    for i in range(100):
        n = int(rng.integers(1, 101))
        p = DynamicsParams(k=3, sih_radius=0.0, stiffness=float(rng.uniform(0, 5)), noise_eta=0.0)
        s = init_population(n, p, RandomDensity(float(rng.uniform(0, 1))), seed=i)
        assert not s.feed_set
        x0, v0 = s.x.copy(), s.v.copy()
        for step in range(1, 6):
            nonzero += int(np.count_nonzero(social_forces(s)))
            advance(s)
            worst = max(worst, float(np.max(np.abs(s.x - (x0 + step * p.dt * v0)))),
                        float(np.max(np.abs(s.v - v0))))
    elapsed = time.perf_counter() - start
    ok = nonzero == 0 and worst <= 1e-12 and elapsed < 1.0
    report(1, ok, f"nonzero force components={nonzero}, max ballistic error={worst:.2e}, {elapsed:.2f}s")
    assert ok


# --- 2 ----------------------------------------------------------------------

def test_criterion_2_consensus(report):
    start = time.perf_counter()
    # uniform rigidity: the contraction regime assumes identical attention weights
    s = init_population(50, CONSENSUS_PARAMS, Complete(), seed=0, rigidity=1.0)
    diam = [velocity_diameter(s)]
    for _ in range(2000):
        advance(s)
        diam.append(velocity_diameter(s))
    rises = int(np.sum(np.diff(diam) > 1e-12))
    below = next((t for t, d in enumerate(diam) if d < 1e-3), None)
    phi = polarization(s)
    elapsed = time.perf_counter() - start
    ok = rises == 0 and below is not None and phi >= 0.99 and elapsed < 5.0
    report(2, ok, f"diameter increases={rises}, below 1e-3 at step {below}, final phi={phi:.6f}, {elapsed:.2f}s")
    assert ok


# --- 3 ----------------------------------------------------------------------

ORDER = {"Nomadic": 0, "Flocking": 1, "Stampede": 2}


def non_monotone_bands(seq):
    """Count maximal stretches where the label sits below an earlier, higher label."""
    bands, inside, top = 0, False, -1
    for v in seq:
        below = v < top
        if below and not inside:
            bands += 1
        inside = below
        top = max(top, v)
    return bands


def sweep_ok(labels):
    seq = [ORDER[x] for x in labels]
    return (seq[0] == 0 and seq[-1] == 2 and 1 in seq[1:-1] and non_monotone_bands(seq) <= 1)


def test_non_monotone_band_counter():
    assert non_monotone_bands([0, 1, 1, 2, 2]) == 0
    assert non_monotone_bands([0, 1, 0, 1, 2]) == 1
    assert non_monotone_bands([0, 2, 1, 1, 2]) == 1
    assert non_monotone_bands([0, 1, 0, 1, 2, 1, 2]) == 2
    assert sweep_ok(["Nomadic", "Flocking", "Stampede"])
    assert not sweep_ok(["Nomadic", "Stampede"])


def test_criterion_3_phase_transition(report):
    start = time.perf_counter()
    cfg = horizon_sweep_config(seeds=range(10))
    lo, hi, n = SWEEP_GRID
    rows = sweep_rows(cfg, "params.sih_radius", lo, hi, n)
    by_seed = {}
    for r in rows:
        by_seed.setdefault(r["seed"], []).append(r["final_phase"])
    good = sum(sweep_ok(labels) for labels in by_seed.values())
    elapsed = time.perf_counter() - start
    ok = good >= 8 and elapsed < 120.0
    example = "".join(x[0] for x in by_seed[0])
    report(3, ok, f"{good}/10 seeds ordered, seed 0 sequence {example}, {elapsed:.1f}s")
    assert ok


# --- 4 and 5 ----------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def injection_experiment():
    start = time.perf_counter()
    ctrl, treat = injection_pair(seeds=range(20), steps=400)
    rows = compare_rows(ctrl, treat)
    return rows, compare_summary("swarm", rows), time.perf_counter() - start


def test_criterion_4_injection_direction(report):
    rows, summ, elapsed = injection_experiment()
    d_phi = summ["median_delta_phi"]
    d_pr = summ["median_delta_participation_ratio"]
    ok = d_phi < 0 and d_pr > 0 and elapsed < 120.0
    report(4, ok, f"median dPhi={d_phi:+.4f} (need < 0), median dPR={d_pr:+.4f} (need > 0), {elapsed:.1f}s")
    assert ok


def test_criterion_5_peel_stratification(report):
    rows, summ, _ = injection_experiment()
    low = summ["median_peel_rate_low_rigidity_treatment"]
    high = summ["median_peel_rate_high_rigidity_treatment"]
    pc, pt = summ["median_peeled_control"], summ["median_peeled_treatment"]
    ok = low is not None and high is not None and low >= high and pc < pt
    report(5, ok, f"median peel rate low={low}, high={high}; median peeled control={pc}, treatment={pt}")
    assert ok


# --- 6 ----------------------------------------------------------------------

def test_criterion_6_densification(report):
    start = time.perf_counter()
    ctrl, treat = densification_pair(seeds=range(20))
    summ = compare_summary("swarm", compare_rows(ctrl, treat))
    elapsed = time.perf_counter() - start
    tc = summ["median_first_stampede_t_control"]
    tt = summ["median_first_stampede_t_treatment"]
    tc_v = math.inf if tc is None else tc
    tt_v = math.inf if tt is None else tt
    ok = tt_v < tc_v and elapsed < 120.0
    report(6, ok, f"median first Stampede step control={tc_v}, densified={tt_v}, {elapsed:.1f}s")
    assert ok


# --- 7 ----------------------------------------------------------------------

def test_criterion_7_astar_oracle(report):
    start = time.perf_counter()
    mismatches = 0
    for seed in range(100):
        net = random_network(seed, max_nodes=50)
        rng = np.random.default_rng(seed + 7)
        src, dst = (int(v) for v in rng.choice(len(net.nodes), 2, replace=False))
        got = astar_route(net, src, dst).cost
        mismatches += got != O.uniform_cost(len(net.nodes), triples(net), src, dst)
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 5.0
    report(7, ok, f"{mismatches}/100 cost mismatches, {elapsed:.2f}s")
    assert ok


# --- 8 ----------------------------------------------------------------------

def test_criterion_8_wreck_threshold(report):
    start = time.perf_counter()
    sc = wreck_threshold_scenario()
    res = run_scenario(sc)
    t_b = res.summary["first_broadcast_closure_s"]
    before = sum(1 for e in res.events if e.event == "destroyed" and e.t_seconds <= t_b)
    timing_err = abs(t_b - 20 / 3.5)

    # front at 1/3 mile per minute over a corridor whose third edge has its midpoint 10 miles out
    net = hazard_corridor(5, 4.0)
    hz = HazardFront(origin=(0.0, 0.0), direction=(1.0, 0.0), speed=1.0 / 3.0, t0=0.0)
    lit = {}
    for t in range(0, 3601):
        for eid in advance_hazard(net, hz, float(t)):
            lit[eid] = float(t)
    expected = {eid: math.ceil(O.ignition_time(net.midpoint(eid), (0, 0), (1, 0), 1 / 3, 0.0) - 1e-9)
                for eid in net.edges}
    elapsed = time.perf_counter() - start
    ok = (before == 20 and timing_err <= sc.dt + 1e-9 and lit.get(2) == 1800.0 and lit == expected
          and elapsed < 5.0)
    report(8, ok, f"destroyed before broadcast={before}, broadcast at {t_b}s vs {20 / 3.5:.4f}s, "
                  f"10-mile edge ignited at {lit.get(2)}s, {elapsed:.2f}s")
    assert ok


# --- 9 ----------------------------------------------------------------------

def test_criterion_9_diverse_fleet(report):
    start = time.perf_counter()
    scripted = run_scenario(ridge_scenario(scripted_models=["A"] * 4 + ["B"], p_block=1.0))
    on_fire = sum(1 for e in scripted.events if e.event == "destroyed" and e.edge_id == 1)
    ctrl, treat = fleet_pair(seeds=range(20))
    summ = compare_summary("route", compare_rows(ctrl, treat))
    elapsed = time.perf_counter() - start
    hom, div = summ["median_destroyed_control"], summ["median_destroyed_treatment"]
    ok = on_fire <= 4 and div < hom and elapsed < 60.0
    report(9, ok, f"scripted stall losses={on_fire}, median destroyed homogeneous={hom}, diverse={div}, "
                  f"{elapsed:.1f}s")
    assert ok


# --- 10 ---------------------------------------------------------------------

def folder_bytes(folder):
    return {n: open(os.path.join(folder, n), "rb").read() for n in sorted(os.listdir(folder))}


def test_criterion_10_determinism(report, tmp_path):
    swarm = stampede_config(steps=60, seeds=(0, 1))
    ctrl, treat = fleet_pair(seeds=range(3))
    c_swarm, t_swarm = injection_pair(seeds=range(2), steps=220)
    small_sweep = horizon_sweep_config(seeds=(0, 1))
    runs = {
        "swarm-run": lambda out, w: cmd_swarm_run(swarm, 1, out),
        "route-run": lambda out, w: cmd_route_run(ctrl, 2, out),
        "sweep": lambda out, w: cmd_sweep(small_sweep, "params.sih_radius", 0.0, 40.0, 3, out=out, workers=w),
        "compare-swarm": lambda out, w: cmd_compare(c_swarm, t_swarm, out=out, workers=w),
        "compare-route": lambda out, w: cmd_compare(ctrl, treat, out=out, workers=w),
    }
    differing = []
    for name, fn in runs.items():
        fn(tmp_path / name / "a", 1)
        fn(tmp_path / name / "b", 1)
        fn(tmp_path / name / "c", 2)
        a, b, c = (folder_bytes(tmp_path / name / x) for x in "abc")
        if not (a == b == c and a):
            differing.append(name)
    ok = not differing
    report(10, ok, f"commands with differing bytes: {differing or 'none'}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
