"""Experiment configuration files.

Configs are JSON objects with a ``schema_version`` and a ``kind`` of
either ``"swarm"`` or ``"route"``.  Parsing is fail-closed: an unknown key
anywhere is an error naming the key.  Missing keys take the defaults
below, and :meth:`to_dict` echoes the fully resolved config so a run can
be repeated from its own output.

Swarm config keys (defaults in brackets)::

    n [50], steps [500], rigidity [null = drawn per agent]
    topology: {"type": "Complete" | "RandomDensity" (p) | "SimilarityThreshold" (tau)}
    params: {k [3], sih_radius ["inf"], stiffness [1], kernel_beta [0.5],
             noise_eta [0], dt [0.1], v_max [5],
             env [null | {"type": "Attractor", "goal": [...], "gain": g}
                       | {"type": "ReflectingBox", "half_width": L}]}
    injection [null]: {m, strategy, t_inject, placement_spread, velocity_mode}
    densification [null]: {similarity_tau, added_edges, push_gain, t_apply}
    thresholds: {phi_hi [0.9], phi_lo [0.3], density_hi [0.5], window [10]}
    peel: {theta_deg [60], t_peel [20], capture_t [null = injection time], split [0.5]}
    seeds [[0]], out ["out"]

Route config keys::

    network: path to a network file (relative to the config) or
             {"nodes": [[id, x, y], ...], "edges": [[id, u, v, length(, "closed")], ...]}
    source, destination
    hazard [null]: {origin [[0, 0]], direction [[1, 0]], speed_mi_per_min [1/3], t0 [0]}
    spawn_rate [3.5], model_b_fraction [0], p_block [0.5], wreck_threshold [20],
    speed_mi_per_min [1], dt [0.1], horizon [60], scripted_models [[]]
    seeds [[0]], out ["out"]
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields
from typing import Optional, Union

from .dynamics import (
    Attractor, Complete, DynamicsParams, RandomDensity, ReflectingBox, SimilarityThreshold,
)
from .interventions import DensificationSpec, InjectionSpec
from .metrics import PhaseThresholds
from .results import SCHEMA_VERSION
from .routing import Edge, FleetScenario, HazardFront, RoadNetwork, load_network


class ConfigError(ValueError):
    pass


def _take(obj: dict, where: str, allowed: dict) -> dict:
    """Merge ``obj`` over ``allowed`` defaults, rejecting unknown keys."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}")
    out = dict(allowed)
    out.update(obj)
    return out


def _num(value, where: str) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _num_out(x: float):
    return "inf" if x == math.inf else x


def _build(where: str, factory, **kwargs):
    try:
        return factory(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _seeds(value, where="seeds") -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: need a non-empty list of integers")
    return [_int(s, f"{where}[{i}]") for i, s in enumerate(value)]


# --- swarm ------------------------------------------------------------------

def _topology_from(obj, where="topology"):
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError(f"{where}: need an object with a 'type'")
    kind = obj["type"]
    if kind == "Complete":
        _take(obj, where, {"type": None})
        return Complete()
    if kind == "RandomDensity":
        d = _take(obj, where, {"type": None, "p": 0.3})
        return _build(f"{where}.p", RandomDensity, p=_num(d["p"], f"{where}.p"))
    if kind == "SimilarityThreshold":
        d = _take(obj, where, {"type": None, "tau": 5.0})
        return _build(f"{where}.tau", SimilarityThreshold, tau=_num(d["tau"], f"{where}.tau"))
    raise ConfigError(f"{where}.type: unknown topology {kind!r}")


def _topology_to(top) -> dict:
    if isinstance(top, RandomDensity):
        return {"type": "RandomDensity", "p": top.p}
    if isinstance(top, SimilarityThreshold):
        return {"type": "SimilarityThreshold", "tau": top.tau}
    return {"type": "Complete"}


def _env_from(obj, where="params.env"):
    if obj is None:
        return None
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError(f"{where}: need null or an object with a 'type'")
    if obj["type"] == "Attractor":
        d = _take(obj, where, {"type": None, "goal": None, "gain": 1.0})
        if not isinstance(d["goal"], list):
            raise ConfigError(f"{where}.goal: expected a list of numbers")
        goal = tuple(_num(g, f"{where}.goal") for g in d["goal"])
        return _build(where, Attractor, goal=goal, gain=_num(d["gain"], f"{where}.gain"))
    if obj["type"] == "ReflectingBox":
        d = _take(obj, where, {"type": None, "half_width": 10.0})
        return _build(where, ReflectingBox, half_width=_num(d["half_width"], f"{where}.half_width"))
    raise ConfigError(f"{where}.type: unknown environment {obj['type']!r}")


def _env_to(env):
    if isinstance(env, Attractor):
        return {"type": "Attractor", "goal": list(env.goal), "gain": env.gain}
    if isinstance(env, ReflectingBox):
        return {"type": "ReflectingBox", "half_width": env.half_width}
    return None


_PARAM_DEFAULTS = {f.name: f.default for f in fields(DynamicsParams)}


def _params_from(obj, where="params") -> DynamicsParams:
    d = _take(obj, where, _PARAM_DEFAULTS)
    kwargs = {"k": _int(d["k"], f"{where}.k"), "env": _env_from(d["env"], f"{where}.env")}
    for name in ("sih_radius", "stiffness", "kernel_beta", "noise_eta", "dt", "v_max"):
        kwargs[name] = _num(d[name], f"{where}.{name}")
    try:
        return DynamicsParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _params_to(p: DynamicsParams) -> dict:
    return {"k": p.k, "sih_radius": _num_out(p.sih_radius), "stiffness": p.stiffness,
            "kernel_beta": p.kernel_beta, "noise_eta": p.noise_eta, "dt": p.dt,
            "v_max": p.v_max, "env": _env_to(p.env)}


@dataclass(frozen=True)
class PeelConfig:
    theta_deg: float = 60.0
    t_peel: int = 20
    capture_t: Optional[int] = None
    split: float = 0.5


@dataclass(frozen=True)
class SwarmConfig:
    n: int = 50
    steps: int = 500
    params: DynamicsParams = DynamicsParams()
    topology: object = Complete()
    rigidity: Optional[float] = None
    injection: Optional[InjectionSpec] = None
    densification: Optional[DensificationSpec] = None
    thresholds: PhaseThresholds = PhaseThresholds()
    peel: PeelConfig = PeelConfig()
    seeds: tuple = (0,)
    out: str = "out"
    kind: str = field(default="swarm", init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n: population size must be >= 1")
        if self.steps < 0:
            raise ConfigError("steps: must be >= 0")
        if not self.seeds:
            raise ConfigError("seeds: at least one seed is required")

    @property
    def peel_capture_t(self) -> Optional[int]:
        if self.peel.capture_t is not None:
            return self.peel.capture_t
        return self.injection.t_inject if self.injection is not None else None

    def to_dict(self) -> dict:
        inj = self.injection
        den = self.densification
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "swarm",
            "n": self.n,
            "steps": self.steps,
            "rigidity": self.rigidity,
            "topology": _topology_to(self.topology),
            "params": _params_to(self.params),
            "injection": None if inj is None else {
                "m": inj.m, "strategy": inj.strategy.value, "t_inject": inj.t_inject,
                "placement_spread": inj.placement_spread, "velocity_mode": inj.velocity_mode.value},
            "densification": None if den is None else {
                "similarity_tau": den.similarity_tau, "added_edges": den.added_edges,
                "push_gain": den.push_gain, "t_apply": den.t_apply},
            "thresholds": {"phi_hi": self.thresholds.phi_hi, "phi_lo": self.thresholds.phi_lo,
                           "density_hi": self.thresholds.density_hi, "window": self.thresholds.window},
            "peel": {"theta_deg": self.peel.theta_deg, "t_peel": self.peel.t_peel,
                     "capture_t": self.peel.capture_t, "split": self.peel.split},
            "seeds": list(self.seeds),
            "out": self.out,
        }


def _swarm_from(d: dict) -> SwarmConfig:
    top = _take(d, "config", {
        "schema_version": SCHEMA_VERSION, "kind": "swarm", "n": 50, "steps": 500, "rigidity": None,
        "topology": {"type": "Complete"}, "params": {}, "injection": None, "densification": None,
        "thresholds": {}, "peel": {}, "seeds": [0], "out": "out"})
    inj = None
    if top["injection"] is not None:
        i = _take(top["injection"], "injection", {
            "m": 10, "strategy": "Feed", "t_inject": 200, "placement_spread": 1.0,
            "velocity_mode": "Antipodal"})
        inj = _build("injection", InjectionSpec, m=_int(i["m"], "injection.m"), strategy=i["strategy"],
                     t_inject=_int(i["t_inject"], "injection.t_inject"),
                     placement_spread=_num(i["placement_spread"], "injection.placement_spread"),
                     velocity_mode=i["velocity_mode"])
    den = None
    if top["densification"] is not None:
        s = _take(top["densification"], "densification", {
            "similarity_tau": 5.0, "added_edges": 100, "push_gain": 0.0, "t_apply": 100})
        den = _build("densification", DensificationSpec,
                     similarity_tau=_num(s["similarity_tau"], "densification.similarity_tau"),
                     added_edges=_int(s["added_edges"], "densification.added_edges"),
                     push_gain=_num(s["push_gain"], "densification.push_gain"),
                     t_apply=_int(s["t_apply"], "densification.t_apply"))
    th = _take(top["thresholds"], "thresholds", {"phi_hi": 0.9, "phi_lo": 0.3, "density_hi": 0.5, "window": 10})
    thresholds = _build("thresholds", PhaseThresholds,
                        phi_hi=_num(th["phi_hi"], "thresholds.phi_hi"),
                        phi_lo=_num(th["phi_lo"], "thresholds.phi_lo"),
                        density_hi=_num(th["density_hi"], "thresholds.density_hi"),
                        window=_int(th["window"], "thresholds.window"))
    pe = _take(top["peel"], "peel", {"theta_deg": 60.0, "t_peel": 20, "capture_t": None, "split": 0.5})
    peel = PeelConfig(theta_deg=_num(pe["theta_deg"], "peel.theta_deg"),
                      t_peel=_int(pe["t_peel"], "peel.t_peel"),
                      capture_t=None if pe["capture_t"] is None else _int(pe["capture_t"], "peel.capture_t"),
                      split=_num(pe["split"], "peel.split"))
    rig = top["rigidity"]
    if rig is not None:
        rig = _num(rig, "rigidity")
        if not 0 <= rig <= 1:
            raise ConfigError("rigidity: must lie in [0, 1]")
    if not isinstance(top["out"], str):
        raise ConfigError("out: expected a string")
    return SwarmConfig(
        n=_int(top["n"], "n"), steps=_int(top["steps"], "steps"),
        params=_params_from(top["params"]), topology=_topology_from(top["topology"]),
        rigidity=rig, injection=inj, densification=den, thresholds=thresholds, peel=peel,
        seeds=tuple(_seeds(top["seeds"])), out=top["out"],
    )


# --- route ------------------------------------------------------------------

def _network_from(obj, base_dir: str) -> RoadNetwork:
    if isinstance(obj, str):
        path = obj if os.path.isabs(obj) else os.path.join(base_dir, obj)
        try:
            return load_network(path)
        except OSError as exc:
            raise ConfigError(f"network: cannot read {path}: {exc.strerror}") from None
        except ValueError as exc:
            raise ConfigError(f"network: {path}: {exc}") from None
    d = _take(obj, "network", {"nodes": [], "edges": []})
    try:
        nodes = {int(n[0]): (float(n[1]), float(n[2])) for n in d["nodes"]}
        edges = []
        for row in d["edges"]:
            if len(row) not in (4, 5) or (len(row) == 5 and row[4] != "closed"):
                raise ValueError(f"bad edge record {row!r}")
            edges.append(Edge(int(row[0]), int(row[1]), int(row[2]), float(row[3]),
                              closed_official=len(row) == 5))
        return RoadNetwork(nodes, edges)
    except (ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"network: {exc}") from None


def network_to_dict(net: RoadNetwork) -> dict:
    return {
        "nodes": [[nid, *net.nodes[nid]] for nid in sorted(net.nodes)],
        "edges": [[e.id, e.u, e.v, e.length] + (["closed"] if e.closed_official else [])
                  for e in (net.edges[i] for i in sorted(net.edges))],
    }


@dataclass(frozen=True)
class RouteConfig:
    scenario: FleetScenario
    seeds: tuple = (0,)
    out: str = "out"
    kind: str = field(default="route", init=False)

    def scenario_for(self, seed: int) -> FleetScenario:
        sc = self.scenario
        return FleetScenario(**{f.name: getattr(sc, f.name) for f in fields(sc)} | {"seed": seed})

    def to_dict(self) -> dict:
        sc = self.scenario
        hz = sc.hazard
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "route",
            "network": network_to_dict(sc.network),
            "source": sc.source,
            "destination": sc.destination,
            "hazard": None if hz is None else {
                "origin": list(hz.origin), "direction": list(hz.direction),
                "speed_mi_per_min": hz.speed, "t0": hz.t0},
            "spawn_rate": sc.spawn_rate,
            "model_b_fraction": sc.model_b_fraction,
            "p_block": sc.p_block,
            "wreck_threshold": sc.wreck_threshold,
            "speed_mi_per_min": sc.speed,
            "dt": sc.dt,
            "horizon": sc.horizon,
            "scripted_models": [m.value for m in sc.scripted_models],
            "seeds": list(self.seeds),
            "out": self.out,
        }


def _route_from(d: dict, base_dir: str) -> RouteConfig:
    top = _take(d, "config", {
        "schema_version": SCHEMA_VERSION, "kind": "route", "network": None, "source": None,
        "destination": None, "hazard": None, "spawn_rate": 3.5, "model_b_fraction": 0.0,
        "p_block": 0.5, "wreck_threshold": 20, "speed_mi_per_min": 1.0, "dt": 0.1,
        "horizon": 60.0, "scripted_models": [], "seeds": [0], "out": "out"})
    for key in ("network", "source", "destination"):
        if top[key] is None:
            raise ConfigError(f"{key}: required for route configs")
    net = _network_from(top["network"], base_dir)
    hazard = None
    if top["hazard"] is not None:
        h = _take(top["hazard"], "hazard", {"origin": [0.0, 0.0], "direction": [1.0, 0.0],
                                            "speed_mi_per_min": 1.0 / 3.0, "t0": 0.0})
        hazard = _build("hazard", HazardFront,
                        origin=tuple(_num(v, "hazard.origin") for v in h["origin"]),
                        direction=tuple(_num(v, "hazard.direction") for v in h["direction"]),
                        speed=_num(h["speed_mi_per_min"], "hazard.speed_mi_per_min"),
                        t0=_num(h["t0"], "hazard.t0"))
    scripted = top["scripted_models"]
    if not isinstance(scripted, list) or any(m not in ("A", "B") for m in scripted):
        raise ConfigError("scripted_models: expected a list of 'A' / 'B'")
    seeds = _seeds(top["seeds"])
    sc = _build("config", FleetScenario,
                network=net, source=_int(top["source"], "source"),
                destination=_int(top["destination"], "destination"), hazard=hazard,
                spawn_rate=_num(top["spawn_rate"], "spawn_rate"),
                model_b_fraction=_num(top["model_b_fraction"], "model_b_fraction"),
                p_block=_num(top["p_block"], "p_block"),
                wreck_threshold=_int(top["wreck_threshold"], "wreck_threshold"),
                speed=_num(top["speed_mi_per_min"], "speed_mi_per_min"),
                dt=_num(top["dt"], "dt"), horizon=_num(top["horizon"], "horizon"),
                seed=seeds[0], scripted_models=tuple(scripted))
    if not net.is_connected():
        raise ConfigError("network: graph must be connected at scenario start")
    return RouteConfig(scenario=sc, seeds=tuple(seeds), out=top["out"])


ExperimentConfig = Union[SwarmConfig, RouteConfig]


def config_from_dict(d: dict, base_dir: str = ".") -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config: top level must be an object")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r} (expected {SCHEMA_VERSION!r})")
    kind = d.get("kind")
    if kind == "swarm":
        return _swarm_from(d)
    if kind == "route":
        return _route_from(d, base_dir)
    raise ConfigError(f"kind: expected 'swarm' or 'route', got {kind!r}")


def parse_config(text: str, source: str = "<config>", base_dir: str = ".") -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return config_from_dict(data, base_dir)


def load_config(path) -> ExperimentConfig:
    path = os.fspath(path)
    with open(path) as fh:
        text = fh.read()
    return parse_config(text, source=path, base_dir=os.path.dirname(os.path.abspath(path)))


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"
