"""Interventions on a running swarm: diversity injection and like-minded densification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import InfluenceGraph, SwarmState, clamp_speed, pairwise_distances


class Strategy(str, Enum):
    FEED = "Feed"
    SPATIAL = "Spatial"


class VelocityMode(str, Enum):
    ANTIPODAL = "Antipodal"
    RANDOM_UNIT = "RandomUnit"


@dataclass(frozen=True)
class InjectionSpec:
    m: int = 10
    strategy: Strategy = Strategy.FEED
    t_inject: int = 200
    placement_spread: float = 1.0
    velocity_mode: VelocityMode = VelocityMode.ANTIPODAL

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "velocity_mode", VelocityMode(self.velocity_mode))
        if int(self.m) != self.m or self.m < 0:
            raise ValueError("m must be a non-negative integer")
        if int(self.t_inject) != self.t_inject or self.t_inject < 0:
            raise ValueError("t_inject must be a non-negative integer")
        if not self.placement_spread > 0:
            raise ValueError("placement_spread must be > 0")


@dataclass(frozen=True)
class DensificationSpec:
    similarity_tau: float = 5.0
    added_edges: int = 100
    push_gain: float = 0.0
    t_apply: int = 100

    def __post_init__(self):
        if not self.similarity_tau >= 0:
            raise ValueError("similarity_tau must be >= 0")
        if int(self.added_edges) != self.added_edges or self.added_edges < 0:
            raise ValueError("added_edges must be a non-negative integer")
        if not self.push_gain >= 0:
            raise ValueError("push_gain must be >= 0")


class InjectionError(RuntimeError):
    pass


def _herd_centroid_and_direction(state: SwarmState):
    reg = state.regular
    centroid = state.x[reg].mean(axis=0)
    mean_v = state.v[reg].mean(axis=0)
    norm = float(np.linalg.norm(mean_v))
    if norm == 0.0:
        raise InjectionError("herd has no mean direction to oppose")
    return centroid, mean_v / norm


def _ball(rng: np.random.Generator, m: int, k: int, radius: float) -> np.ndarray:
    g = rng.standard_normal((m, k))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(m) ** (1.0 / k)
    return g * r[:, None]


def inject_in_place(state: SwarmState, spec: InjectionSpec) -> SwarmState:
    if state.t != spec.t_inject:
        raise InjectionError(f"injection scheduled for t={spec.t_inject}, state is at t={state.t}")
    if any(e.get("event") == "inject" and e.get("t") == state.t for e in state.log):
        raise InjectionError(f"an injection already happened at t={state.t}")
    state.log.append({"event": "inject", "t": state.t, "m": spec.m,
                      "strategy": spec.strategy.value, "velocity_mode": spec.velocity_mode.value})
    if spec.m == 0:
        return state

    k = state.params.k
    centroid, direction = _herd_centroid_and_direction(state)
    if spec.strategy is Strategy.SPATIAL:
        # box center is the origin, so reflecting through it negates the centroid
        pos = -centroid + _ball(state.rng, spec.m, k, spec.placement_spread)
    else:
        pos = np.tile(centroid, (spec.m, 1))
    if spec.velocity_mode is VelocityMode.ANTIPODAL:
        vel = np.tile(-direction, (spec.m, 1))
    else:
        vel = state.rng.standard_normal((spec.m, k))
        vel /= np.linalg.norm(vel, axis=1, keepdims=True)

    n0 = state.n
    n1 = n0 + spec.m
    w = np.ones((n1, n1))
    w[:n0, :n0] = state.graph.weights
    np.fill_diagonal(w, 0.0)

    state.x = np.vstack([state.x, pos])
    state.v = np.vstack([state.v, vel])
    state.rigidity = np.concatenate([state.rigidity, np.zeros(spec.m)])
    state.injected = np.concatenate([state.injected, np.ones(spec.m, dtype=bool)])
    state.graph = InfluenceGraph(w, state.graph.topology_tag)
    if spec.strategy is Strategy.FEED:
        state.feed_set |= set(range(n0, n1))
    return state


def inject_diversity(state: SwarmState, spec: InjectionSpec) -> SwarmState:
    """Return a copy of ``state`` with ``spec.m`` injected beacon agents appended.

    Injected agents keep their initial velocity forever.  Under the feed
    strategy every agent sees them regardless of distance or graph.
    """
    return inject_in_place(state.copy(), spec)


def remove_in_place(state: SwarmState) -> SwarmState:
    if not state.injected.any() and not state.feed_set:
        return state
    keep = state.regular
    state.x = state.x[keep]
    state.v = state.v[keep]
    state.rigidity = state.rigidity[keep]
    state.injected = state.injected[keep]
    state.graph = InfluenceGraph(state.graph.weights[np.ix_(keep, keep)].copy(), state.graph.topology_tag)
    state.feed_set = set()
    state.log.append({"event": "remove_injection", "t": state.t})
    return state


def remove_injection(state: SwarmState) -> SwarmState:
    return remove_in_place(state.copy())


def densify_in_place(state: SwarmState, spec: DensificationSpec) -> SwarmState:
    reg_ids = np.flatnonzero(state.regular)
    dist = pairwise_distances(state.x)
    candidates = []
    for a, i in enumerate(reg_ids):
        for j in reg_ids[a + 1:]:
            if state.graph.weights[i, j] <= 0 and dist[i, j] <= spec.similarity_tau:
                candidates.append((dist[i, j], int(i), int(j)))
    candidates.sort()
    chosen = candidates[: spec.added_edges]
    for _, i, j in chosen:
        state.graph.add_edge(i, j)
    shortfall = spec.added_edges - len(chosen)

    if spec.push_gain > 0:
        reg = state.regular
        v = state.v[reg]
        speed = np.linalg.norm(v, axis=1, keepdims=True)
        heading = np.divide(v, speed, out=np.zeros_like(v), where=speed > 0)
        state.v[reg] = clamp_speed(v + spec.push_gain * heading, state.params.v_max)

    state.log.append({"event": "densify", "t": state.t, "added": len(chosen), "shortfall": shortfall})
    return state


def densify_likeminded(state: SwarmState, spec: DensificationSpec) -> SwarmState:
    """Return a copy with up to ``spec.added_edges`` new edges between close, unconnected agents.

    Closest pairs go first; ties break on the id pair.  A shortfall (fewer
    eligible pairs than requested) is recorded in ``state.log``.
    """
    return densify_in_place(state.copy(), spec)


def last_shortfall(state: SwarmState) -> int:
    for entry in reversed(state.log):
        if entry.get("event") == "densify":
            return entry["shortfall"]
    return 0


__all__ = [
    "DensificationSpec", "InjectionError", "InjectionSpec", "Strategy", "VelocityMode",
    "densify_in_place", "densify_likeminded", "inject_diversity", "inject_in_place",
    "last_shortfall", "remove_in_place", "remove_injection",
]
