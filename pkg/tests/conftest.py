"""Shared fixtures and a small harness for driving single runs in-process."""

import random

import numpy as np
import pytest

from wsnsim.adversary import (
    SELECTIVE_FORWARD,
    Adversary,
    AdversaryConfig,
    CompromisedSet,
    null_adversary,
)
from wsnsim.engine import Engine
from wsnsim.metrics import RunMetrics
from wsnsim.protocols import PROTOCOLS, RunContext
from wsnsim.topology import Topology, sample_until_connected


@pytest.fixture(scope="session")
def topo300():
    """One study-scale topology, the same for every test that asks."""
    rng = np.random.default_rng(20240817)
    return sample_until_connected(300, 100.0, 20.0, rng, require_greedy_routable=True)


@pytest.fixture(scope="session")
def topo60():
    rng = np.random.default_rng(7)
    return sample_until_connected(60, 50.0, 14.0, rng, require_greedy_routable=True)


def line_topology(hops: int, spacing: float = 19.0) -> Topology:
    """Sink plus `hops` nodes in a row; node i sits at x = i * spacing.

    Consecutive nodes are in range of each other, nothing else is, so node i
    is exactly i hops from the sink and greedy progress always exists.
    """
    n = hops + 1
    xs = np.arange(n, dtype=float) * spacing
    positions = np.column_stack([xs, np.zeros(n)])
    adjacency = [
        [j for j in (i - 1, i + 1) if 0 <= j < n] for i in range(n)
    ]
    return Topology(n, xs[-1] + 1.0, spacing + 0.5, positions, adjacency)


def mini_run(
    topo,
    protocol: str,
    compromised=frozenset(),
    behavior: str = SELECTIVE_FORWARD,
    p_f: float = 0.0,
    traffic: dict | None = None,
    sim_time: float = 40.0,
    ttl: int = 32,
    malicious_generate_data: bool = True,
    seed: int = 1,
):
    """Drive one run with hand-picked adversary and traffic; return (metrics, proto).

    traffic maps node id -> origination times; omitted nodes stay silent. By
    default every non-sink node sends one packet at t=10 (past warm-up).
    """
    if traffic is None:
        traffic = {i: [10.0] for i in range(topo.node_count) if i != topo.sink}
    traffic_times = [sorted(traffic.get(i, [])) for i in range(topo.node_count)]
    metrics = RunMetrics(topo.node_count)
    if compromised:
        cfg = AdversaryConfig("uniform", len(compromised), behavior, p_f)
        adv = Adversary(
            topo,
            cfg,
            CompromisedSet(frozenset(compromised)),
            random.Random(seed + 1),
            sybil_rnd=random.Random(seed + 2),
            malicious_generate_data=malicious_generate_data,
        )
    else:
        adv = null_adversary(topo)
    engine = Engine(topo, 0.001, metrics)
    ctx = RunContext(
        topo=topo,
        metrics=metrics,
        adversary=adv,
        ttl=ttl,
        hello_period=3.0,
        purge_period=7.5,
        sim_time=sim_time,
        traffic_times=traffic_times,
        hello_phase=[(0.37 * i) % 3.0 for i in range(topo.node_count)],
        choices_rnd=random.Random(seed),
    )
    proto = PROTOCOLS[protocol](engine, ctx)
    proto.start()
    engine.run()
    proto.finalize()
    return metrics, proto


def bfs_hops(adjacency, src: int) -> list[int]:
    """Plain BFS hop counts, -1 for unreachable. Independent oracle."""
    from collections import deque

    dist = [-1] * len(adjacency)
    dist[src] = 0
    q = deque([src])
    while q:
        u = q.popleft()
        for v in adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist
