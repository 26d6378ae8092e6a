"""Random geometric deployments and hop gradients towards a central sink."""
from collections import deque
from dataclasses import dataclass

import numpy as np

SINK = 0
DISCONNECTED = -1


@dataclass
class Topology:
    positions: np.ndarray  # (n, 2), row 0 is the sink
    side: float
    radio_range: float
    adjacency: list  # sorted tuples of neighbor ids
    gradient: list  # hop count to the sink, DISCONNECTED if unreachable
    sink: int = SINK

    def __post_init__(self):
        self._groups = None

    @property
    def node_count(self):
        return len(self.positions)

    def connected(self, node):
        return self.gradient[node] != DISCONNECTED

    def diameter(self):
        return max(self.gradient)

    def mean_degree(self):
        return sum(len(a) for a in self.adjacency) / self.node_count

    def groups(self, node):
        if self._groups is None:
            self._groups = [neighbor_groups(self, v) for v in range(self.node_count)]
        return self._groups[node]


def disc_adjacency(positions, radio_range):
    pts = np.asarray(positions, dtype=float)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
    close = d2 <= radio_range * radio_range
    np.fill_diagonal(close, False)
    return [tuple(np.flatnonzero(row).tolist()) for row in close]


def from_positions(positions, side, radio_range):
    """Build a topology from explicit coordinates; node 0 is the sink."""
    positions = np.asarray(positions, dtype=float)
    topo = Topology(positions, side, radio_range, disc_adjacency(positions, radio_range), [])
    return compute_gradients(topo)


def from_adjacency(adjacency, sink=SINK):
    """Topology with explicit links (positions are left at the origin)."""
    adj = [set() for _ in adjacency]
    for u, nbrs in enumerate(adjacency):
        for v in nbrs:
            adj[u].add(v)
            adj[v].add(u)
    topo = Topology(np.zeros((len(adj), 2)), 0.0, 0.0, [tuple(sorted(a)) for a in adj], [], sink)
    return compute_gradients(topo)


def generate(node_count, side, radio_range, rng):
    """Sink at the centre plus ``node_count - 1`` nodes placed uniformly at random.

    Uniform placement of a fixed number of points is a Poisson process
    conditioned on its count.
    """
    if node_count < 1 or side <= 0 or radio_range <= 0:
        raise ValueError("node_count >= 1, side > 0 and radio_range > 0 required")
    others = rng.uniform(0.0, side, size=(node_count - 1, 2))
    positions = np.vstack([[side / 2, side / 2], others])
    return from_positions(positions, side, radio_range)


def compute_gradients(topo):
    grad = [DISCONNECTED] * topo.node_count
    grad[topo.sink] = 0
    queue = deque([topo.sink])
    while queue:
        u = queue.popleft()
        for v in topo.adjacency[u]:
            if grad[v] == DISCONNECTED:
                grad[v] = grad[u] + 1
                queue.append(v)
    topo.gradient = grad
    topo._groups = None
    return topo


def neighbor_groups(topo, node):
    """(lower, equal) neighbor tuples by gradient; the sink has neither."""
    g = topo.gradient[node]
    if node == topo.sink or g == DISCONNECTED:
        return (), ()
    lower = tuple(v for v in topo.adjacency[node] if topo.gradient[v] == g - 1)
    equal = tuple(v for v in topo.adjacency[node] if topo.gradient[v] == g)
    return lower, equal
