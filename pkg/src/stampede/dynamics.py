"""Belief-space swarm dynamics.

Agents carry a position and a velocity in a k-dimensional belief space.
Each step, every regular agent aligns its velocity with the agents it can
see (kernel-weighted Cucker-Smale alignment), receives optional Gaussian
noise and an environmental push, and then moves.  Everything is
synchronous: forces are evaluated on the pre-step snapshot.

The state is a bundle of numpy arrays indexed by agent id.  ``AgentState``
is only a read-only view for callers that want per-agent records.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
from scipy.spatial.distance import cdist

from .results import RunResult

DEFAULT_HALF_WIDTH = 10.0


class Kind(str, Enum):
    REGULAR = "Regular"
    INJECTED = "Injected"


# --- topology descriptors -------------------------------------------------

@dataclass(frozen=True)
class Complete:
    def tag(self) -> str:
        return "Complete"


@dataclass(frozen=True)
class RandomDensity:
    p: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0) or math.isnan(self.p):
            raise ValueError(f"edge probability must lie in [0, 1], got {self.p}")

    def tag(self) -> str:
        return f"RandomDensity({self.p})"


@dataclass(frozen=True)
class SimilarityThreshold:
    tau: float

    def __post_init__(self):
        if not self.tau >= 0.0:
            raise ValueError(f"similarity threshold must be >= 0, got {self.tau}")

    def tag(self) -> str:
        return f"SimilarityThreshold({self.tau})"


Topology = Union[Complete, RandomDensity, SimilarityThreshold]


# --- environments ---------------------------------------------------------

@dataclass(frozen=True)
class Attractor:
    goal: tuple
    gain: float

    def __post_init__(self):
        object.__setattr__(self, "goal", tuple(float(g) for g in self.goal))
        if not self.gain >= 0.0:
            raise ValueError("attractor gain must be >= 0")


@dataclass(frozen=True)
class ReflectingBox:
    half_width: float

    def __post_init__(self):
        if not self.half_width > 0.0:
            raise ValueError("box half width must be > 0")


Environment = Optional[Union[Attractor, ReflectingBox]]


@dataclass(frozen=True)
class DynamicsParams:
    """Knobs of the belief dynamics.

    ``sih_radius`` is the social influence horizon, ``stiffness`` the
    coupling gain on the whole social term, ``kernel_beta`` the decay
    exponent of the communication kernel and ``noise_eta`` the amplitude
    of per-component velocity noise.
    """

    k: int = 3
    sih_radius: float = math.inf
    stiffness: float = 1.0
    kernel_beta: float = 0.5
    noise_eta: float = 0.0
    dt: float = 0.1
    v_max: float = 5.0
    env: Environment = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        for name in ("sih_radius", "stiffness", "kernel_beta", "noise_eta"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.v_max > 0.0:
            raise ValueError(f"v_max must be > 0, got {self.v_max}")
        if isinstance(self.env, Attractor) and len(self.env.goal) != self.k:
            raise ValueError("attractor goal must have dimension k")

    @property
    def half_width(self) -> float:
        if isinstance(self.env, ReflectingBox):
            return self.env.half_width
        return DEFAULT_HALF_WIDTH


@dataclass(frozen=True)
class AgentState:
    id: int
    x: np.ndarray
    v: np.ndarray
    rigidity: float
    kind: Kind


@dataclass
class InfluenceGraph:
    weights: np.ndarray
    topology_tag: str

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def edges(self) -> list:
        """Undirected edges as sorted ``(i, j)`` pairs with ``i < j``."""
        ii, jj = np.nonzero(np.triu(self.weights > 0, k=1))
        return list(zip(ii.tolist(), jj.tolist()))

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights > 0, k=1)))

    def add_edge(self, i: int, j: int, w: float = 1.0) -> None:
        if i == j:
            raise ValueError("self-loops are not allowed")
        self.weights[i, j] = w
        self.weights[j, i] = w

    def copy(self) -> "InfluenceGraph":
        return InfluenceGraph(self.weights.copy(), self.topology_tag)


@dataclass
class SwarmState:
    x: np.ndarray
    v: np.ndarray
    rigidity: np.ndarray
    injected: np.ndarray
    graph: InfluenceGraph
    params: DynamicsParams
    rng: np.random.Generator
    t: int = 0
    feed_set: set = field(default_factory=set)
    log: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def regular(self) -> np.ndarray:
        return ~self.injected

    def agent(self, i: int) -> AgentState:
        _check_id(self, i)
        return AgentState(
            id=i,
            x=self.x[i].copy(),
            v=self.v[i].copy(),
            rigidity=float(self.rigidity[i]),
            kind=Kind.INJECTED if self.injected[i] else Kind.REGULAR,
        )

    @property
    def agents(self) -> list:
        return [self.agent(i) for i in range(self.n)]

    def copy(self) -> "SwarmState":
        return SwarmState(
            x=self.x.copy(),
            v=self.v.copy(),
            rigidity=self.rigidity.copy(),
            injected=self.injected.copy(),
            graph=self.graph.copy(),
            params=self.params,
            rng=copy.deepcopy(self.rng),
            t=self.t,
            feed_set=set(self.feed_set),
            log=list(self.log),
        )


def _check_id(state: SwarmState, i) -> None:
    if not (isinstance(i, (int, np.integer)) and 0 <= i < state.n):
        raise IndexError(f"invalid agent id {i!r} for population of {state.n}")


def build_graph(x: np.ndarray, topology: Topology, rng: np.random.Generator) -> InfluenceGraph:
    n = x.shape[0]
    if isinstance(topology, Complete):
        w = np.ones((n, n))
    elif isinstance(topology, RandomDensity):
        # one uniform per unordered pair, drawn row-major over the upper triangle
        iu = np.triu_indices(n, k=1)
        draws = rng.random(len(iu[0]))
        w = np.zeros((n, n))
        w[iu] = (draws < topology.p).astype(float)
        w = w + w.T
    elif isinstance(topology, SimilarityThreshold):
        w = (pairwise_distances(x) <= topology.tau).astype(float)
    else:
        raise TypeError(f"unknown topology {topology!r}")
    np.fill_diagonal(w, 0.0)
    return InfluenceGraph(w, topology.tag())


def init_population(
    n: int,
    params: DynamicsParams,
    topology: Topology = Complete(),
    seed: int = 0,
    rigidity: Optional[float] = None,
) -> SwarmState:
    """Draw a fresh population.

    Positions are uniform in the box ``[-L, L]^k``, velocities uniform in
    ``[-1, 1]^k`` (then speed-clamped) and rigidities uniform in [0, 1].
    Passing ``rigidity`` overrides the drawn rigidities with a constant
    after the draw, so the rest of the stream is unaffected.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    n = int(n)
    k = params.k
    rng = np.random.default_rng(seed)
    L = params.half_width
    x = rng.uniform(-L, L, size=(n, k))
    v = clamp_speed(rng.uniform(-1.0, 1.0, size=(n, k)), params.v_max)
    rig = rng.uniform(0.0, 1.0, size=n)
    if rigidity is not None:
        if not 0.0 <= rigidity <= 1.0:
            raise ValueError("rigidity must lie in [0, 1]")
        rig = np.full(n, float(rigidity))
    graph = build_graph(x, topology, rng)
    return SwarmState(
        x=x, v=v, rigidity=rig, injected=np.zeros(n, dtype=bool),
        graph=graph, params=params, rng=rng,
    )


def pairwise_distances(x: np.ndarray, rows=None) -> np.ndarray:
    """Euclidean distances from ``x[rows]`` (default: all) to every agent."""
    x = np.asarray(x, dtype=float)
    return cdist(x if rows is None else x[rows], x)


def communication_kernel(r, beta: float):
    """psi(r) = (1 + r^2)^(-beta); equals 1 at r = 0 and never increases."""
    return (1.0 + np.square(r)) ** (-beta)


def clamp_speed(v: np.ndarray, v_max: float) -> np.ndarray:
    speed = np.sqrt(np.sum(v * v, axis=-1, keepdims=True))
    scale = np.where(speed > v_max, v_max / np.where(speed > 0, speed, 1.0), 1.0)
    return v * scale


def visibility(state: SwarmState, dist: Optional[np.ndarray] = None) -> np.ndarray:
    """Boolean matrix ``vis[i, j]``: agent i is influenced by agent j."""
    if dist is None:
        dist = pairwise_distances(state.x)
    vis = (state.graph.weights > 0) & (dist <= state.params.sih_radius)
    if state.feed_set:
        vis[:, sorted(state.feed_set)] = True
    np.fill_diagonal(vis, False)
    return vis


def effective_neighbors(state: SwarmState, i: int) -> set:
    _check_id(state, i)
    d = pairwise_distances(state.x, [i])[0]
    near = (state.graph.weights[i] > 0) & (d <= state.params.sih_radius)
    out = set(np.flatnonzero(near).tolist())
    out |= state.feed_set
    out.discard(i)
    return out


def _attention(state: SwarmState) -> np.ndarray:
    """a[i, j]: rigidity_i toward regular agents, 1 - rigidity_i toward injected or feed agents."""
    diverse = state.injected.copy()
    if state.feed_set:
        diverse[sorted(state.feed_set)] = True
    rig = state.rigidity[:, None]
    return np.where(diverse[None, :], 1.0 - rig, rig)


def social_forces(state: SwarmState) -> np.ndarray:
    """Social force on every agent, shape ``(n, k)``.

    Per-neighbor terms are sorted before summation so the result depends
    only on the multiset of terms, never on agent numbering.
    """
    p = state.params
    x, v = state.x, state.v
    dist = pairwise_distances(x)
    coef = np.where(visibility(state, dist), _attention(state) * communication_kernel(dist, p.kernel_beta), 0.0)
    terms = coef[:, :, None] * (v[None, :, :] - v[:, None, :])
    terms = np.sort(terms, axis=1)
    return p.stiffness * np.sum(terms, axis=1)


def social_force(state: SwarmState, i: int) -> np.ndarray:
    _check_id(state, i)
    p = state.params
    nbrs = sorted(effective_neighbors(state, i))
    if not nbrs:
        return np.zeros(p.k)
    a = _attention(state)[i]
    d = pairwise_distances(state.x, [i])[0]
    terms = np.zeros((state.n, p.k))
    for j in nbrs:
        terms[j] = a[j] * communication_kernel(d[j], p.kernel_beta) * (state.v[j] - state.v[i])
    return p.stiffness * np.sum(np.sort(terms, axis=0), axis=0)


def env_force(params: DynamicsParams, x: np.ndarray) -> np.ndarray:
    """Environmental push; accepts one position or a stack of positions."""
    x = np.asarray(x, dtype=float)
    env = params.env
    if not isinstance(env, Attractor):
        return np.zeros_like(x)
    delta = np.asarray(env.goal) - x
    norm = np.sqrt(np.sum(delta * delta, axis=-1, keepdims=True))
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(norm > 0, env.gain * delta / safe, 0.0)


def _reflect(x: np.ndarray, v: np.ndarray, L: float) -> None:
    over = x > L
    x[over] = 2 * L - x[over]
    v[over] = -v[over]
    under = x < -L
    x[under] = -2 * L - x[under]
    v[under] = -v[under]


def advance(state: SwarmState) -> None:
    """One synchronous Euler step, in place."""
    p = state.params
    force = social_forces(state)
    xi = state.rng.standard_normal(size=state.v.shape)
    accel = force + p.noise_eta * xi + env_force(p, state.x)
    reg = state.regular
    v_new = state.v.copy()
    v_new[reg] = clamp_speed(state.v[reg] + p.dt * accel[reg], p.v_max)
    x_new = state.x + p.dt * v_new
    if isinstance(p.env, ReflectingBox):
        xr, vr = x_new[reg], v_new[reg]
        _reflect(xr, vr, p.env.half_width)
        x_new[reg], v_new[reg] = xr, vr
    state.x, state.v = x_new, v_new
    state.t += 1


def step(state: SwarmState) -> SwarmState:
    """Return the successor state; the input (and its PRNG) is left untouched."""
    nxt = state.copy()
    advance(nxt)
    return nxt


Recorder = Callable[[SwarmState], object]


def run(
    state: SwarmState,
    steps: int,
    recorder: Optional[Recorder] = None,
    hooks: Optional[dict] = None,
) -> RunResult:
    """Advance ``state`` in place ``steps`` times.

    ``recorder(state)`` is called after every step and its return values
    form the time series.  ``hooks`` maps a step counter value to a
    callable applied to the state before that step is taken (used to
    schedule interventions).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    hooks = hooks or {}
    records = []
    for _ in range(int(steps)):
        hook = hooks.get(state.t)
        if hook is not None:
            hook(state)
        advance(state)
        if recorder is not None:
            records.append(recorder(state))
    return RunResult(records=records, final_state=state)
