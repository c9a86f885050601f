"""Canonical scenarios used by the demos and the acceptance suite."""

from __future__ import annotations

import math

from .config import PeelConfig, RouteConfig, SwarmConfig
from .dynamics import Attractor, Complete, DynamicsParams, RandomDensity
from .interventions import DensificationSpec, InjectionSpec
from .metrics import PhaseThresholds
from .routing import Edge, FleetScenario, HazardFront, RoadNetwork

# --- swarm ------------------------------------------------------------------

# A runaway herd: fully connected, stiff, and pulled toward a far-off goal.
STAMPEDE_PARAMS = DynamicsParams(
    k=3, sih_radius=math.inf, stiffness=1.0, kernel_beta=0.5, noise_eta=0.0,
    dt=0.1, v_max=5.0, env=Attractor(goal=(1000.0, 0.0, 0.0), gain=0.4),
)

# Nobody can see anybody: pure noisy drift.
NOMADIC_PARAMS = DynamicsParams(k=3, sih_radius=0.0, noise_eta=0.05)

# Sparse random ties, global horizon: partial alignment, low degree.
FLOCKING_PARAMS = DynamicsParams(k=3, sih_radius=math.inf, noise_eta=0.05)

CONSENSUS_PARAMS = DynamicsParams(k=3, stiffness=1.0, kernel_beta=0.25, noise_eta=0.0, dt=0.05)


def stampede_config(steps: int = 500, seeds=(0,), injection=None) -> SwarmConfig:
    return SwarmConfig(n=50, steps=steps, params=STAMPEDE_PARAMS, topology=Complete(),
                       injection=injection, seeds=tuple(seeds))


def feed_injection(t_inject: int = 200, m: int = 10) -> InjectionSpec:
    return InjectionSpec(m=m, strategy="Feed", t_inject=t_inject, velocity_mode="Antipodal")


def injection_pair(seeds=range(20), steps: int = 400):
    """Control and treatment configs for the paired injection experiment.

    Both capture the herd direction at t = 200 so their peel counts are
    measured against the same reference.
    """
    peel = PeelConfig(capture_t=200)
    ctrl = SwarmConfig(n=50, steps=steps, params=STAMPEDE_PARAMS, peel=peel, seeds=tuple(seeds))
    treat = SwarmConfig(n=50, steps=steps, params=STAMPEDE_PARAMS, peel=peel, seeds=tuple(seeds),
                        injection=feed_injection())
    return ctrl, treat


def nomadic_config(steps: int = 200, seeds=(0,)) -> SwarmConfig:
    return SwarmConfig(n=100, steps=steps, params=NOMADIC_PARAMS, seeds=tuple(seeds))


FLOCKING_TOPOLOGY = RandomDensity(0.3)


def flocking_config(steps: int = 300, seeds=(0,), densification=None) -> SwarmConfig:
    return SwarmConfig(n=50, steps=steps, params=FLOCKING_PARAMS, topology=FLOCKING_TOPOLOGY,
                       densification=densification, seeds=tuple(seeds))


TROLL_DENSIFICATION = DensificationSpec(similarity_tau=15.0, added_edges=300, push_gain=0.0, t_apply=100)


def densification_pair(seeds=range(20), steps: int = 300):
    return (flocking_config(steps, seeds),
            flocking_config(steps, seeds, densification=TROLL_DENSIFICATION))


# The horizon sweep runs at fixed sparse density.  Because only a third of
# all pairs are ever tied, the mean degree fraction tops out near 0.3; the
# Stampede label here asks for full alignment and at least a quarter of
# the population in view.
SWEEP_THRESHOLDS = PhaseThresholds(phi_hi=0.9, phi_lo=0.3, density_hi=0.25, window=10)
SWEEP_GRID = (0.0, 40.0, 12)


def horizon_sweep_config(seeds=range(10)) -> SwarmConfig:
    return SwarmConfig(n=100, steps=300, params=DynamicsParams(k=3, noise_eta=0.05),
                       topology=RandomDensity(0.3), thresholds=SWEEP_THRESHOLDS, seeds=tuple(seeds))


# --- route ------------------------------------------------------------------

def fire_corridor() -> RoadNetwork:
    """Source 0, a short access road, then the only way out (edge 1) already burning.

    Node 2 is the destination.  Edge 1 dips south of the access road, so a
    front coming up from the south reaches it first.
    """
    nodes = {0: (0.0, 0.0), 1: (0.001, 0.0), 2: (1.001, -0.2)}
    edges = [Edge(0, 0, 1, 0.001), Edge(1, 1, 2, 1.05)]
    return RoadNetwork(nodes, edges)


# burned side is y <= -0.05 at t0: edge 1 (midpoint y = -0.1) burns at once,
# the access road (y = 0) only after 9 s
CORRIDOR_HAZARD = HazardFront(origin=(0.0, -0.05), direction=(0.0, 1.0), speed=1.0 / 3.0, t0=0.0)


def ridge_network() -> RoadNetwork:
    """The corridor plus a longer detour over the ridge.

    Edge 1 is the short way from the junction (node 1) to town (node 2)
    and it is on fire.  Edges 2 and 3 climb over the ridge through node 3.
    The access road takes six ticks to drive, so a queue forms on it.
    """
    nodes = {0: (0.0, 0.0), 1: (0.01, 0.0), 2: (1.01, -0.2), 3: (0.51, 1.0)}
    edges = [Edge(0, 0, 1, 0.01), Edge(1, 1, 2, 1.05), Edge(2, 1, 3, 1.2), Edge(3, 3, 2, 1.4)]
    return RoadNetwork(nodes, edges)


# a stationary front: the valley road burns, the ridge never does
RIDGE_HAZARD = HazardFront(origin=(0.0, -0.05), direction=(0.0, 1.0), speed=0.0, t0=0.0)


def wreck_threshold_scenario(seed: int = 0) -> FleetScenario:
    return FleetScenario(network=fire_corridor(), source=0, destination=2, hazard=CORRIDOR_HAZARD,
                         spawn_rate=3.5, model_b_fraction=0.0, wreck_threshold=20, dt=0.1,
                         horizon=8.0, seed=seed)


def ridge_scenario(seed: int = 0, model_b_fraction: float = 0.0, p_block: float = 0.5,
                   scripted_models=(), horizon: float = 30.0) -> FleetScenario:
    return FleetScenario(network=ridge_network(), source=0, destination=2, hazard=RIDGE_HAZARD,
                         spawn_rate=3.5, model_b_fraction=model_b_fraction, p_block=p_block,
                         wreck_threshold=20, dt=0.1, horizon=horizon, seed=seed,
                         scripted_models=tuple(scripted_models))


def fleet_pair(seeds=range(20)):
    """Homogeneous control and diverse treatment on the ridge network."""
    return (RouteConfig(ridge_scenario(), seeds=tuple(seeds)),
            RouteConfig(ridge_scenario(model_b_fraction=0.1, p_block=0.5), seeds=tuple(seeds)))


def hazard_corridor(n_edges: int = 5, spacing: float = 2.5) -> RoadNetwork:
    """A straight east-west road cut into equal edges, for ignition-time checks."""
    nodes = {i: (i * spacing, 0.0) for i in range(n_edges + 1)}
    edges = [Edge(i, i, i + 1, spacing) for i in range(n_edges)]
    return RoadNetwork(nodes, edges)
