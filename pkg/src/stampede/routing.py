"""Road network, hazard front, A* routing and the fleet simulator.

Times are seconds, distances miles.  The hazard front speed and the
vehicle speed are given in miles per minute, the units the scenario is
usually described in.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np


class NoRoute(Exception):
    """Destination unreachable over edges the vehicle believes passable."""


class Model(str, Enum):
    A = "A"  # hazard-blind
    B = "B"  # hazard-blind and failure-prone: may stall and block the road


class Status(str, Enum):
    EN_ROUTE = "EnRoute"
    ARRIVED = "Arrived"
    DESTROYED = "Destroyed"
    STALLED = "Stalled"


@dataclass
class Edge:
    id: int
    u: int
    v: int
    length: float
    closed_official: bool = False
    closed_broadcast: bool = False
    ignited: bool = False
    blocked: bool = False
    wreck_count: int = 0

    def other(self, node: int) -> int:
        return self.v if node == self.u else self.u


class RoadNetwork:
    """Undirected road graph with per-edge hazard and closure flags.

    Flags only ever go from False to True; use the ``set_*`` methods.
    """

    def __init__(self, nodes: dict, edges: Sequence[Edge]):
        self.nodes = {int(k): (float(x), float(y)) for k, (x, y) in nodes.items()}
        self.edges = {}
        self.adj = {nid: [] for nid in self.nodes}
        for e in edges:
            if e.id in self.edges:
                raise ValueError(f"duplicate edge id {e.id}")
            if e.u not in self.nodes or e.v not in self.nodes:
                raise ValueError(f"edge {e.id} references an unknown node")
            if not e.length > 0:
                raise ValueError(f"edge {e.id} has non-positive length")
            self.edges[e.id] = e
            self.adj[e.u].append(e.id)
            if e.v != e.u:
                self.adj[e.v].append(e.id)
        for nid in self.adj:
            self.adj[nid].sort(key=lambda eid: (self.edges[eid].other(nid), eid))

    def copy(self) -> "RoadNetwork":
        return RoadNetwork(dict(self.nodes), [Edge(**vars(e)) for e in self.edges.values()])

    def midpoint(self, eid: int) -> tuple:
        e = self.edges[eid]
        (x1, y1), (x2, y2) = self.nodes[e.u], self.nodes[e.v]
        return (0.5 * (x1 + x2), 0.5 * (y1 + y2))

    def straight_line(self, a: int, b: int) -> float:
        (x1, y1), (x2, y2) = self.nodes[a], self.nodes[b]
        return math.hypot(x2 - x1, y2 - y1)

    def is_connected(self) -> bool:
        if not self.nodes:
            return True
        start = next(iter(self.nodes))
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for eid in self.adj[u]:
                w = self.edges[eid].other(u)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.nodes)

    def set_ignited(self, eid: int) -> None:
        self.edges[eid].ignited = True

    def set_blocked(self, eid: int) -> None:
        self.edges[eid].blocked = True

    def set_closed_broadcast(self, eid: int) -> None:
        self.edges[eid].closed_broadcast = True

    def set_closed_official(self, eid: int) -> None:
        self.edges[eid].closed_official = True


# --- network files ----------------------------------------------------------
#
#   # comment
#   node <id> <x_miles> <y_miles>
#   edge <id> <u> <v> <length_miles> [closed]
#
# Whitespace separated, one record per line.  The optional trailing
# ``closed`` marks an official (police) closure at scenario start.

def parse_network(text: str) -> RoadNetwork:
    nodes, edges = {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "node" and len(parts) == 4:
                nid = int(parts[1])
                if nid in nodes:
                    raise ValueError(f"duplicate node id {nid}")
                nodes[nid] = (float(parts[2]), float(parts[3]))
            elif parts[0] == "edge" and len(parts) in (5, 6):
                closed = False
                if len(parts) == 6:
                    if parts[5] != "closed":
                        raise ValueError(f"unknown edge flag {parts[5]!r}")
                    closed = True
                edges.append(Edge(int(parts[1]), int(parts[2]), int(parts[3]), float(parts[4]),
                                  closed_official=closed))
            else:
                raise ValueError(f"cannot parse record {raw.strip()!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return RoadNetwork(nodes, edges)


def load_network(path) -> RoadNetwork:
    with open(path) as fh:
        return parse_network(fh.read())


def format_network(net: RoadNetwork) -> str:
    lines = []
    for nid in sorted(net.nodes):
        x, y = net.nodes[nid]
        lines.append(f"node {nid} {x!r} {y!r}")
    for eid in sorted(net.edges):
        e = net.edges[eid]
        tail = " closed" if e.closed_official else ""
        lines.append(f"edge {e.id} {e.u} {e.v} {e.length!r}{tail}")
    return "\n".join(lines) + "\n"


# --- perception and routing -------------------------------------------------

def perceive_model_a(edge: Edge) -> bool:
    """Passable unless closed or physically blocked; fire itself is invisible."""
    return not (edge.closed_official or edge.closed_broadcast or edge.blocked)


@dataclass(frozen=True)
class Path:
    nodes: tuple
    edges: tuple
    cost: float


def astar_route(net: RoadNetwork, src: int, dst: int,
                perceive: Callable[[Edge], bool] = perceive_model_a) -> Path:
    """Shortest path by length over passable edges.

    The straight-line distance to ``dst`` is the heuristic, which is
    admissible as long as no edge is shorter than the chord between its
    endpoints.  Ties on f-score go to the smaller node id.
    """
    if src not in net.nodes or dst not in net.nodes:
        raise KeyError(f"unknown node {src if src not in net.nodes else dst}")
    if src == dst:
        return Path((src,), (), 0.0)
    g = {src: 0.0}
    parent = {src: (None, None)}
    closed = set()
    heap = [(net.straight_line(src, dst), src)]
    while heap:
        _, u = heapq.heappop(heap)
        if u in closed:
            continue
        if u == dst:
            break
        closed.add(u)
        for eid in net.adj[u]:
            e = net.edges[eid]
            if not perceive(e):
                continue
            w = e.other(u)
            if w in closed:
                continue
            cand = g[u] + e.length
            if cand < g.get(w, math.inf):
                g[w] = cand
                parent[w] = (u, eid)
                heapq.heappush(heap, (cand + net.straight_line(w, dst), w))
    else:
        raise NoRoute(f"no passable route from {src} to {dst}")
    nodes, edges = [dst], []
    while nodes[-1] != src:
        prev, eid = parent[nodes[-1]]
        nodes.append(prev)
        edges.append(eid)
    return Path(tuple(reversed(nodes)), tuple(reversed(edges)), g[dst])


# --- hazard -----------------------------------------------------------------

@dataclass(frozen=True)
class HazardFront:
    """A straight fire line sweeping across the plane.

    Points with ``(p - origin) . direction <= speed * (t - t0)`` are burned.
    ``speed`` is in miles per minute, ``t0`` in seconds.
    """

    origin: tuple = (0.0, 0.0)
    direction: tuple = (1.0, 0.0)
    speed: float = 1.0 / 3.0
    t0: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        norm = float(np.hypot(*d))
        if norm == 0:
            raise ValueError("hazard direction must be non-zero")
        object.__setattr__(self, "direction", (float(d[0] / norm), float(d[1] / norm)))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if not self.speed >= 0:
            raise ValueError("hazard speed must be >= 0")

    def displacement(self, t: float) -> float:
        """Miles the front has travelled by time ``t`` (seconds)."""
        return self.speed * max(t - self.t0, 0.0) / 60.0

    def depth(self, point) -> float:
        return ((point[0] - self.origin[0]) * self.direction[0]
                + (point[1] - self.origin[1]) * self.direction[1])

    def ignition_time(self, point) -> float:
        d = self.depth(point)
        if d <= 0:
            return self.t0
        if self.speed == 0:
            return math.inf
        return self.t0 + 60.0 * d / self.speed


def advance_hazard(net: RoadNetwork, hazard: Optional[HazardFront], t: float) -> list:
    """Ignite every edge whose midpoint is behind the front at time ``t``.

    Returns the ids of edges newly ignited by this call.
    """
    if hazard is None or t < hazard.t0:
        return []
    reach = hazard.displacement(t)
    fresh = []
    for eid in sorted(net.edges):
        e = net.edges[eid]
        if not e.ignited and hazard.depth(net.midpoint(eid)) <= reach:
            net.set_ignited(eid)
            fresh.append(eid)
    return fresh


# --- fleet simulation -------------------------------------------------------

@dataclass
class Vehicle:
    id: int
    model: Model
    route: list = field(default_factory=list)
    route_edges: list = field(default_factory=list)
    leg: int = 0
    edge_progress: float = 0.0
    status: Status = Status.EN_ROUTE
    holding: bool = False

    @property
    def node(self) -> int:
        """Node the vehicle is at, or heading to if it is mid-edge."""
        return self.route[self.leg + 1] if self.edge_progress > 0 else self.route[self.leg]

    @property
    def remaining_edges(self) -> list:
        start = self.leg + 1 if self.edge_progress > 0 else self.leg
        return self.route_edges[start:]


@dataclass(frozen=True)
class FleetScenario:
    network: RoadNetwork
    source: int
    destination: int
    hazard: Optional[HazardFront] = None
    spawn_rate: float = 3.5
    model_b_fraction: float = 0.0
    p_block: float = 0.5
    wreck_threshold: int = 20
    speed: float = 1.0
    dt: float = 0.1
    horizon: float = 60.0
    seed: int = 0
    scripted_models: tuple = ()

    def __post_init__(self):
        if not self.spawn_rate > 0:
            raise ValueError("spawn_rate must be > 0")
        if not 0 <= self.model_b_fraction <= 1:
            raise ValueError("model_b_fraction must lie in [0, 1]")
        if not 0 <= self.p_block <= 1:
            raise ValueError("p_block must lie in [0, 1]")
        if int(self.wreck_threshold) != self.wreck_threshold or self.wreck_threshold < 1:
            raise ValueError("wreck_threshold must be an integer >= 1")
        if not self.speed > 0 or not self.dt > 0:
            raise ValueError("speed and dt must be > 0")
        if not self.horizon >= 0:
            raise ValueError("horizon must be >= 0")
        for nid in (self.source, self.destination):
            if nid not in self.network.nodes:
                raise ValueError(f"unknown node {nid}")
        object.__setattr__(self, "scripted_models", tuple(Model(m) for m in self.scripted_models))


@dataclass
class Event:
    t_seconds: float
    event: str
    edge_id: Optional[int] = None
    vehicle_id: Optional[int] = None
    detail: str = ""

    def row(self) -> dict:
        return {"t_seconds": self.t_seconds, "event": self.event, "edge_id": self.edge_id,
                "vehicle_id": self.vehicle_id, "detail": self.detail}


class FleetSim:
    """Mutable simulation state; call :meth:`tick` to advance one ``dt``."""

    def __init__(self, scenario: FleetScenario):
        self.sc = scenario
        self.net = scenario.network.copy()
        self.rng = np.random.default_rng(scenario.seed)
        self.tick_no = 0
        self.t = 0.0
        self.vehicles: list = []
        self.events: list = []
        self.first_broadcast: Optional[float] = None
        self.first_safe_reroute: Optional[float] = None
        self.perceive = perceive_model_a
        self._stale = False

    # counts
    def count(self, status: Status) -> int:
        return sum(1 for v in self.vehicles if v.status is status)

    def _log(self, event, edge=None, vehicle=None, detail=""):
        self.events.append(Event(self.t, event, edge, vehicle, detail))

    def _plan(self, veh: Vehicle, start: int, replan: bool) -> bool:
        try:
            path = astar_route(self.net, start, self.sc.destination, self.perceive)
        except NoRoute:
            if not veh.holding:
                self._log("noroute", vehicle=veh.id, detail=f"node={start}")
            veh.holding = True
            return False
        if replan:
            # keep the travelled legs, and the current one when mid-edge
            done = veh.leg + (1 if veh.edge_progress > 0 else 0)
            veh.route = veh.route[:done] + list(path.nodes)
            veh.route_edges = veh.route_edges[:done] + list(path.edges)
        else:
            veh.route, veh.route_edges = list(path.nodes), list(path.edges)
        veh.holding = False
        if replan:
            fire_free = not any(self.net.edges[e].ignited for e in path.edges)
            self._log("replan", vehicle=veh.id,
                      detail=f"from={start} cost={path.cost:.6g} fire_free={int(fire_free)}")
            if fire_free and self.first_safe_reroute is None:
                self.first_safe_reroute = self.t
        else:
            self._log("plan", vehicle=veh.id, detail=f"cost={path.cost:.6g}")
        return True

    def _hit_fire(self, veh: Vehicle, eid: int) -> None:
        """Vehicle is on (or entering) a burning edge."""
        edge = self.net.edges[eid]
        if veh.model is Model.B and self.rng.random() < self.sc.p_block:
            veh.status = Status.STALLED
            if not edge.blocked:
                self.net.set_blocked(eid)
                self._stale = True
            self._log("stalled", eid, veh.id, "edge blocked")
            return
        veh.status = Status.DESTROYED
        edge.wreck_count += 1
        self._log("destroyed", eid, veh.id, f"wrecks={edge.wreck_count}")

    def _enter(self, veh: Vehicle) -> bool:
        """Try to start the current leg; False when the vehicle cannot move on."""
        eid = veh.route_edges[veh.leg]
        edge = self.net.edges[eid]
        if not self.perceive(edge):
            # the road ahead is known to be shut; wait for a replan
            veh.holding = True
            self._stale = True
            return False
        if edge.ignited:
            self._hit_fire(veh, eid)
            return False
        return True

    def _move(self, veh: Vehicle, dist: float) -> None:
        while dist > 0 and veh.status is Status.EN_ROUTE:
            if veh.leg >= len(veh.route_edges):
                veh.status = Status.ARRIVED
                self._log("arrived", vehicle=veh.id)
                return
            if veh.edge_progress == 0 and not self._enter(veh):
                return
            edge = self.net.edges[veh.route_edges[veh.leg]]
            left = edge.length - veh.edge_progress
            if dist < left:
                veh.edge_progress += dist
                return
            dist -= left
            veh.leg += 1
            veh.edge_progress = 0.0
            if veh.leg >= len(veh.route_edges):
                veh.status = Status.ARRIVED
                self._log("arrived", vehicle=veh.id)
                return

    def _spawn(self) -> Vehicle:
        idx = len(self.vehicles)
        draw = self.rng.random()
        if idx < len(self.sc.scripted_models):
            model = self.sc.scripted_models[idx]
        else:
            model = Model.B if draw < self.sc.model_b_fraction else Model.A
        veh = Vehicle(id=idx, model=model, route=[self.sc.source])
        self.vehicles.append(veh)
        self._log("spawn", vehicle=idx, detail=f"model={model.value}")
        return veh

    def tick(self) -> None:
        sc = self.sc
        self.tick_no += 1
        self.t = round(self.tick_no * sc.dt, 9)

        # (1) fire advances; anyone already on a freshly ignited edge is caught
        for eid in advance_hazard(self.net, sc.hazard, self.t):
            self._log("ignite", eid)
            for veh in self.vehicles:
                if (veh.status is Status.EN_ROUTE and veh.edge_progress > 0
                        and veh.route_edges[veh.leg] == eid):
                    self._hit_fire(veh, eid)

        # (2)-(3) spawn and plan
        due = int(math.floor(sc.spawn_rate * self.t + 1e-9))
        while len(self.vehicles) < due:
            veh = self._spawn()
            self._plan(veh, sc.source, replan=False)

        # (4) movement
        step = sc.speed * sc.dt / 60.0
        for veh in self.vehicles:
            if veh.status is Status.EN_ROUTE and not veh.holding:
                self._move(veh, step)

        # (5) wreck piles become known
        for eid in sorted(self.net.edges):
            e = self.net.edges[eid]
            if e.wreck_count >= sc.wreck_threshold and not e.closed_broadcast:
                self.net.set_closed_broadcast(eid)
                self._stale = True
                self._log("broadcast_closure", eid, detail=f"wrecks={e.wreck_count}")
                if self.first_broadcast is None:
                    self.first_broadcast = self.t

        # (6) replan around anything newly impassable; held vehicles retry
        stale, self._stale = self._stale, False
        for veh in self.vehicles:
            if veh.status is not Status.EN_ROUTE:
                continue
            if veh.holding:
                self._plan(veh, veh.node, replan=True)
            elif stale and any(not self.perceive(self.net.edges[e]) for e in veh.remaining_edges):
                self._plan(veh, veh.node, replan=True)

    def summary(self) -> dict:
        return {
            "spawned": len(self.vehicles),
            "arrived": self.count(Status.ARRIVED),
            "destroyed": self.count(Status.DESTROYED),
            "stalled": self.count(Status.STALLED),
            "en_route": self.count(Status.EN_ROUTE),
            "first_broadcast_closure_s": self.first_broadcast,
            "time_to_reroute_s": self.first_safe_reroute,
            "ticks": self.tick_no,
        }


@dataclass
class FleetResult:
    summary: dict
    events: list
    vehicles: list
    network: RoadNetwork

    @property
    def destroyed(self) -> int:
        return self.summary["destroyed"]

    def event_rows(self) -> list:
        return [e.row() for e in self.events]


def run_scenario(scenario: FleetScenario, on_tick: Optional[Callable[[FleetSim], None]] = None) -> FleetResult:
    """Tick from t = 0 to the horizon; deterministic for a given seed."""
    sim = FleetSim(scenario)
    n_ticks = int(math.floor(scenario.horizon / scenario.dt + 1e-9))
    for _ in range(n_ticks):
        sim.tick()
        if on_tick is not None:
            on_tick(sim)
    return FleetResult(sim.summary(), sim.events, sim.vehicles, sim.net)
