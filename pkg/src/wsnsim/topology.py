"""Fixed-radius random geometric topologies on a square field.

Nodes are placed uniformly at random on a side x side square; node 0 is the
sink, pinned to the exact field center. Two nodes are linked iff their
Euclidean distance is at most radio_range (inclusive), which makes the
adjacency symmetric by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SINK = 0


class TopologyError(Exception):
    pass


@dataclass
class Topology:
    node_count: int
    side: float
    radio_range: float
    positions: np.ndarray  # (node_count, 2) float64, row i = node i
    adjacency: list[list[int]]  # sorted neighbor ids per node
    sink: int = SINK

    def __post_init__(self) -> None:
        self.adjacency_sets = [frozenset(nbrs) for nbrs in self.adjacency]
        delta = self.positions - self.positions[self.sink]
        self.dist_to_sink = np.hypot(delta[:, 0], delta[:, 1])

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def distance(self, i: int, j: int) -> float:
        return float(math.dist(self.positions[i], self.positions[j]))


def _adjacency_from_positions(positions: np.ndarray, radio_range: float) -> list[list[int]]:
    delta = positions[:, None, :] - positions[None, :, :]
    dist = np.hypot(delta[..., 0], delta[..., 1])
    within = dist <= radio_range
    np.fill_diagonal(within, False)
    return [sorted(np.nonzero(row)[0].tolist()) for row in within]


def generate_topology(
    node_count: int,
    side: float,
    radio_range: float,
    rng: np.random.Generator,
) -> Topology:
    """Sample one topology: sink at the center, sensors i.i.d. uniform."""
    if node_count < 1:
        raise ValueError("node_count must be >= 1")
    if side <= 0 or radio_range <= 0:
        raise ValueError("side and radio_range must be positive")
    positions = np.empty((node_count, 2), dtype=np.float64)
    positions[SINK] = (side / 2.0, side / 2.0)
    if node_count > 1:
        positions[1:] = rng.uniform(0.0, side, size=(node_count - 1, 2))
    adjacency = _adjacency_from_positions(positions, radio_range)
    return Topology(node_count, side, radio_range, positions, adjacency)


def is_connected(topo: Topology) -> bool:
    """True iff a breadth-first traversal from the sink reaches every node."""
    n = topo.node_count
    seen = bytearray(n)
    seen[topo.sink] = 1
    frontier = [topo.sink]
    reached = 1
    while frontier:
        nxt = []
        for node in frontier:
            for nb in topo.adjacency[node]:
                if not seen[nb]:
                    seen[nb] = 1
                    reached += 1
                    nxt.append(nb)
        frontier = nxt
    return reached == n


def is_greedy_routable(topo: Topology) -> bool:
    """True iff every sensor has a neighbor strictly closer to the sink.

    Greedy geographic forwarding cannot get stuck in a local minimum on such
    a topology, so it delivers every packet that is not discarded en route.
    """
    d = topo.dist_to_sink
    for node in range(topo.node_count):
        if node == topo.sink:
            continue
        own = d[node]
        if not any(d[nb] < own for nb in topo.adjacency[node]):
            return False
    return True


def sample_until_connected(
    node_count: int,
    side: float,
    radio_range: float,
    rng: np.random.Generator,
    max_attempts: int = 100,
    require_greedy_routable: bool = False,
) -> Topology:
    """Rejection-sample topologies until one is connected.

    Keeps the node distribution uniform conditional on connectivity. With
    require_greedy_routable the sample is additionally conditioned on having
    no greedy local minima (no routing holes).
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    for _ in range(max_attempts):
        topo = generate_topology(node_count, side, radio_range, rng)
        if not is_connected(topo):
            continue
        if require_greedy_routable and not is_greedy_routable(topo):
            continue
        return topo
    raise TopologyError(f"disconnected after max_attempts={max_attempts}")


def average_physical_degree(topo: Topology) -> float:
    """Arithmetic mean of per-node neighbor counts."""
    return sum(len(nbrs) for nbrs in topo.adjacency) / topo.node_count


def dump_topology(topo: Topology, path: str) -> None:
    """Write node table (node_id,x,y,is_sink) followed by the edge list (i,j)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node_id,x,y,is_sink\n")
        for node in range(topo.node_count):
            x, y = topo.positions[node]
            fh.write(f"{node},{x:.6f},{y:.6f},{int(node == topo.sink)}\n")
        fh.write("i,j\n")
        for i in range(topo.node_count):
            for j in topo.adjacency[i]:
                if i < j:
                    fh.write(f"{i},{j}\n")
