"""Random road networks for routing checks."""

import numpy as np

from stampede.routing import Edge, RoadNetwork


def random_network(seed, max_nodes=50):
    """Connected graph whose edge lengths never undercut the chord.

    A random spanning tree guarantees connectivity; extra random edges
    add alternative routes.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    pts = rng.uniform(0, 10, size=(n, 2))
    pairs = {(int(rng.integers(0, i)), i) for i in range(1, n)}
    for _ in range(int(rng.integers(0, 2 * n))):
        a, b = sorted(rng.choice(n, 2, replace=False).tolist())
        pairs.add((a, b))
    edges = []
    for eid, (a, b) in enumerate(sorted(pairs)):
        chord = float(np.hypot(*(pts[a] - pts[b])))
        edges.append(Edge(eid, a, b, max(chord, 1e-3) * float(rng.uniform(1.0, 1.6))))
    return RoadNetwork({i: tuple(p) for i, p in enumerate(pts)}, edges)


def triples(net):
    return [(e.u, e.v, e.length) for e in (net.edges[i] for i in sorted(net.edges))]
