"""Batch front end: single runs, sweeps and paired comparisons written to disk.

Every output file carries the resolved config and the seed(s) it came
from.  Parallel cells are merged in sorted order, so the bytes written do
not depend on the worker count.
"""

from __future__ import annotations

import json
import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from .config import ConfigError, RouteConfig, SwarmConfig, config_from_dict
from .dynamics import init_population, run
from .interventions import densify_in_place, inject_in_place, last_shortfall
from .metrics import Phase, PeelTracker, PhaseRecorder
from .results import (
    EVENT_COLUMNS, SCHEMA_VERSION, SWEEP_COLUMNS, TIMESERIES_COLUMNS, RunResult, dumps, write_csv,
)
from .routing import run_scenario

SWARM_COMPARE_COLUMNS = (
    "seed",
    "phi_control", "phi_treatment", "delta_phi",
    "participation_ratio_control", "participation_ratio_treatment", "delta_participation_ratio",
    "peeled_control", "peeled_treatment", "delta_peeled",
    "first_stampede_t_control", "first_stampede_t_treatment",
)
ROUTE_COMPARE_COLUMNS = (
    "seed", "destroyed_control", "destroyed_treatment", "delta_destroyed",
    "arrived_control", "arrived_treatment", "stalled_control", "stalled_treatment",
)


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _compact(cfg) -> str:
    return json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))


def _header(cfg, **extra) -> str:
    lines = [f"schema_version: {SCHEMA_VERSION}", f"config: {_compact(cfg)}"]
    lines += [f"{k}: {json.dumps(v, sort_keys=True, separators=(',', ':'))}" for k, v in extra.items()]
    return "\n".join(lines)


def _outdir(out) -> str:
    out = os.fspath(out)
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from None
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    return out


def _write_text(path, text) -> None:
    with open(path, "w") as fh:
        fh.write(text)


# --- swarm runs -------------------------------------------------------------

def simulate_swarm(cfg: SwarmConfig, seed: int) -> RunResult:
    """One seeded swarm run with the config's interventions scheduled."""
    state = init_population(cfg.n, cfg.params, cfg.topology, seed=seed, rigidity=cfg.rigidity)
    recorder = PhaseRecorder(cfg.thresholds)
    hooks = defaultdict(list)
    if cfg.densification is not None:
        hooks[cfg.densification.t_apply].append(lambda s: densify_in_place(s, cfg.densification))
    if cfg.injection is not None:
        hooks[cfg.injection.t_inject].append(lambda s: inject_in_place(s, cfg.injection))
    if cfg.peel_capture_t is not None:
        def capture(s):
            recorder.peel = PeelTracker(s, math.radians(cfg.peel.theta_deg), cfg.peel.t_peel)
        hooks[cfg.peel_capture_t].append(capture)

    def chain(fns):
        def apply(s):
            for fn in fns:
                fn(s)
        return apply

    result = run(state, cfg.steps, recorder, {t: chain(fns) for t, fns in hooks.items()})
    result.config = cfg.to_dict()
    result.summary = swarm_summary(result.records, recorder, state, cfg)
    result.summary["seed"] = seed
    return result


def swarm_summary(records, recorder, state, cfg) -> dict:
    phis = [r.phi for r in records]
    last = records[-1] if records else None
    first_stampede = next((r.t for r in records if r.phase is Phase.STAMPEDE), None)
    low, high = recorder.peel.rates(cfg.peel.split) if recorder.peel is not None else (None, None)
    return {
        "steps": len(records),
        "final_phase": last.phase.value if last else None,
        "final_phi": last.phi if last else None,
        "mean_phi_window": last.phi_window if last else None,
        "min_phi": min(phis) if phis else None,
        "max_phi": max(phis) if phis else None,
        "final_participation_ratio": last.participation_ratio if last else None,
        "final_velocity_diameter": last.velocity_diameter if last else None,
        "final_mean_degree_fraction": last.mean_degree_fraction if last else None,
        "peeled_count": last.peeled_count if last else 0,
        "peel_rate_low_rigidity": _finite(low),
        "peel_rate_high_rigidity": _finite(high),
        "first_stampede_t": first_stampede,
        "densify_shortfall": last_shortfall(state) if cfg.densification is not None else None,
        "n_injected": int(np.count_nonzero(state.injected)),
    }


def timeseries_rows(records) -> list:
    return [{
        "t": r.t, "phi": r.phi, "velocity_diameter": r.velocity_diameter,
        "participation_ratio": r.participation_ratio, "mean_degree_fraction": r.mean_degree_fraction,
        "phase": r.phase, "peeled_count": r.peeled_count,
    } for r in records]


def _pick_seed(cfg, seed: Optional[int]) -> int:
    return cfg.seeds[0] if seed is None else int(seed)


def cmd_swarm_run(cfg: SwarmConfig, seed: Optional[int] = None, out=None) -> dict:
    """Write timeseries.csv and summary.json; returns the summary document."""
    if not isinstance(cfg, SwarmConfig):
        raise ConfigError("kind: swarm-run needs a swarm config")
    seed = _pick_seed(cfg, seed)
    out = _outdir(out if out is not None else cfg.out)
    result = simulate_swarm(cfg, seed)
    write_csv(os.path.join(out, "timeseries.csv"), TIMESERIES_COLUMNS,
              timeseries_rows(result.records), _header(cfg, seed=seed))
    doc = {"schema_version": SCHEMA_VERSION, "command": "swarm-run", "seed": seed,
           "config": cfg.to_dict(), "summary": result.summary}
    _write_text(os.path.join(out, "summary.json"), dumps(doc))
    return doc


# --- sweeps -----------------------------------------------------------------

def _set_path(d: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = d
    for p in parts[:-1]:
        if not isinstance(node, dict) or not isinstance(node.get(p), dict):
            raise ConfigError(f"unknown parameter {dotted!r}")
        node = node[p]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown parameter {dotted!r}")
    old = node[leaf]
    numeric = old == "inf" or (isinstance(old, (int, float)) and not isinstance(old, bool))
    if not numeric:
        raise ConfigError(f"parameter {dotted!r} is not numeric")
    if isinstance(old, int) and not isinstance(old, bool):
        value = int(round(value))
    node[leaf] = value


def resolve_param(cfg: SwarmConfig, name: str) -> str:
    """Accept a dotted config path, or a bare dynamics parameter name."""
    d = cfg.to_dict()
    if "." not in name and name not in d and name in d["params"]:
        return f"params.{name}"
    return name


def with_param(cfg: SwarmConfig, name: str, value) -> SwarmConfig:
    d = cfg.to_dict()
    _set_path(d, name, value)
    return config_from_dict(d)


def _sweep_cell(args):
    cfg_dict, value, seed = args
    cfg = config_from_dict(cfg_dict)
    res = simulate_swarm(cfg, seed)
    return value, seed, res.summary["final_phase"], res.summary["mean_phi_window"]


def _pool_map(fn, cells, workers: int) -> list:
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


def sweep_rows(cfg: SwarmConfig, param: str, start: float, stop: float, steps: int,
               seeds=None, workers: int = 1) -> list:
    if not isinstance(cfg, SwarmConfig):
        raise ConfigError("kind: sweeps run over swarm configs")
    if int(steps) != steps or steps < 1:
        raise ConfigError("steps: sweep needs at least one grid point")
    param = resolve_param(cfg, param)
    seeds = list(cfg.seeds if seeds is None else seeds)
    cells = []
    for value in np.linspace(start, stop, int(steps)):
        vcfg = with_param(cfg, param, float(value))
        cells += [(vcfg.to_dict(), float(value), int(s)) for s in seeds]
    out = _pool_map(_sweep_cell, cells, workers)
    rows = [{"param": param, "value": v, "seed": s, "final_phase": ph, "mean_phi_window": m}
            for v, s, ph, m in out]
    rows.sort(key=lambda r: (r["value"], r["seed"]))
    return rows


def cmd_sweep(cfg: SwarmConfig, param: str, start: float, stop: float, steps: int,
              seeds=None, out=None, workers: int = 1) -> list:
    """Grid over one numeric parameter times seeds; writes sorted sweep.csv."""
    rows = sweep_rows(cfg, param, start, stop, steps, seeds, workers)
    seeds = list(cfg.seeds if seeds is None else seeds)
    out = _outdir(out if out is not None else cfg.out)
    header = _header(cfg, seeds=seeds,
                     sweep={"param": resolve_param(cfg, param), "from": start, "to": stop, "steps": steps})
    write_csv(os.path.join(out, "sweep.csv"), SWEEP_COLUMNS, rows, header)
    return rows


# --- route runs -------------------------------------------------------------

def simulate_route(cfg: RouteConfig, seed: int):
    return run_scenario(cfg.scenario_for(seed))


def cmd_route_run(cfg: RouteConfig, seed: Optional[int] = None, out=None) -> dict:
    """Write events.csv and summary.json for one seeded fleet run."""
    if not isinstance(cfg, RouteConfig):
        raise ConfigError("kind: route-run needs a route config")
    seed = _pick_seed(cfg, seed)
    out = _outdir(out if out is not None else cfg.out)
    result = simulate_route(cfg, seed)
    write_csv(os.path.join(out, "events.csv"), EVENT_COLUMNS, result.event_rows(), _header(cfg, seed=seed))
    doc = {"schema_version": SCHEMA_VERSION, "command": "route-run", "seed": seed,
           "config": cfg.to_dict(), "summary": result.summary}
    _write_text(os.path.join(out, "summary.json"), dumps(doc))
    return doc


# --- paired comparisons -----------------------------------------------------

def _compare_cell(args):
    kind, ctrl_dict, treat_dict, seed = args
    ctrl, treat = config_from_dict(ctrl_dict), config_from_dict(treat_dict)
    if kind == "swarm":
        return seed, simulate_swarm(ctrl, seed).summary, simulate_swarm(treat, seed).summary
    return seed, simulate_route(ctrl, seed).summary, simulate_route(treat, seed).summary


def _median(values):
    vals = [v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))]
    return _finite(float(np.median(vals))) if vals else None


def _censored_median(values):
    """Median where None means 'never happened' (counted as +inf)."""
    vals = [math.inf if v is None else float(v) for v in values]
    return _finite(float(np.median(vals))) if vals else None


def compare_rows(control, treatment, seeds=None, workers: int = 1):
    if type(control) is not type(treatment):
        raise ConfigError(f"kind: cannot compare a {control.kind} config with a {treatment.kind} config")
    seeds = list(control.seeds if seeds is None else seeds)
    cells = [(control.kind, control.to_dict(), treatment.to_dict(), int(s)) for s in seeds]
    pairs = sorted(_pool_map(_compare_cell, cells, workers), key=lambda p: p[0])
    rows = []
    for seed, c, t in pairs:
        if control.kind == "swarm":
            rows.append({
                "seed": seed,
                "phi_control": c["final_phi"], "phi_treatment": t["final_phi"],
                "delta_phi": t["final_phi"] - c["final_phi"],
                "participation_ratio_control": c["final_participation_ratio"],
                "participation_ratio_treatment": t["final_participation_ratio"],
                "delta_participation_ratio": t["final_participation_ratio"] - c["final_participation_ratio"],
                "peeled_control": c["peeled_count"], "peeled_treatment": t["peeled_count"],
                "delta_peeled": t["peeled_count"] - c["peeled_count"],
                "first_stampede_t_control": c["first_stampede_t"],
                "first_stampede_t_treatment": t["first_stampede_t"],
                "_rates": (c["peel_rate_low_rigidity"], c["peel_rate_high_rigidity"],
                           t["peel_rate_low_rigidity"], t["peel_rate_high_rigidity"]),
            })
        else:
            rows.append({
                "seed": seed,
                "destroyed_control": c["destroyed"], "destroyed_treatment": t["destroyed"],
                "delta_destroyed": t["destroyed"] - c["destroyed"],
                "arrived_control": c["arrived"], "arrived_treatment": t["arrived"],
                "stalled_control": c["stalled"], "stalled_treatment": t["stalled"],
            })
    return rows


def compare_summary(kind: str, rows) -> dict:
    col = lambda name: [r[name] for r in rows]
    if kind == "swarm":
        rates = [r["_rates"] for r in rows]
        return {
            "median_delta_phi": _median(col("delta_phi")),
            "median_delta_participation_ratio": _median(col("delta_participation_ratio")),
            "median_delta_peeled": _median(col("delta_peeled")),
            "median_peeled_control": _median(col("peeled_control")),
            "median_peeled_treatment": _median(col("peeled_treatment")),
            "median_peel_rate_low_rigidity_treatment": _median([r[2] for r in rates]),
            "median_peel_rate_high_rigidity_treatment": _median([r[3] for r in rates]),
            "median_first_stampede_t_control": _censored_median(col("first_stampede_t_control")),
            "median_first_stampede_t_treatment": _censored_median(col("first_stampede_t_treatment")),
        }
    return {
        "median_delta_destroyed": _median(col("delta_destroyed")),
        "median_destroyed_control": _median(col("destroyed_control")),
        "median_destroyed_treatment": _median(col("destroyed_treatment")),
    }


def cmd_compare(control, treatment, seeds=None, out=None, workers: int = 1) -> dict:
    """Paired control/treatment runs per seed; writes compare.csv and summary.json.

    Deltas are treatment minus control.  A median time-to-first-Stampede
    of null means the label never appeared in at least half the runs.
    """
    rows = compare_rows(control, treatment, seeds, workers)
    seeds = [r["seed"] for r in rows]
    out = _outdir(out if out is not None else treatment.out)
    columns = SWARM_COMPARE_COLUMNS if control.kind == "swarm" else ROUTE_COMPARE_COLUMNS
    header = "\n".join([f"schema_version: {SCHEMA_VERSION}",
                        f"control: {_compact(control)}", f"treatment: {_compact(treatment)}",
                        f"seeds: {json.dumps(seeds)}"])
    write_csv(os.path.join(out, "compare.csv"), columns, rows, header)
    doc = {"schema_version": SCHEMA_VERSION, "command": "compare", "kind": control.kind,
           "seeds": seeds, "control": control.to_dict(), "treatment": treatment.to_dict(),
           "summary": compare_summary(control.kind, rows)}
    _write_text(os.path.join(out, "summary.json"), dumps(doc))
    return doc
