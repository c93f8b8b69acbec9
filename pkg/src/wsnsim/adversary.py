"""Compromised-node placement and the four insider behaviors.

Scenario wiring:
  1  selective forwarding (p_f), attackers uniform over the field
  2  selective forwarding (p_f), attackers uniform inside the sinkhole region
  3  Sybil HELLO fabrication, uniform placement (GF / RWR only)
  4  false RREP (DSR) or false INTEREST (GBR), uniform placement

The sink is never compromised. In scenarios 1 and 2 the control plane is
untouched: compromised nodes flood, reply and HELLO exactly like honest ones
and only transit DATA is filtered. Scenario 4 attackers additionally drop
every transit DATA packet once traffic has been attracted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .topology import Topology

SELECTIVE_FORWARD = "selective_forward"
SYBIL_HELLO = "sybil_hello"
FALSE_RREP = "false_rrep"
FALSE_INTEREST = "false_interest"

SCENARIO_PLACEMENTS = {1: "uniform", 2: "sinkhole", 3: "uniform", 4: "uniform"}


class PlacementError(Exception):
    pass


@dataclass
class AdversaryConfig:
    placement: str  # "uniform" | "sinkhole"
    k: int
    behavior: str
    p_f: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_f <= 1.0:
            raise ValueError("p_f must be in [0, 1]")


@dataclass
class CompromisedSet:
    ids: frozenset[int]

    def __len__(self) -> int:
        return len(self.ids)


def behavior_for(scenario: int, protocol: str) -> str:
    if scenario in (1, 2):
        return SELECTIVE_FORWARD
    if scenario == 3:
        return SYBIL_HELLO
    if scenario == 4:
        return FALSE_RREP if protocol == "dsr" else FALSE_INTEREST
    raise ValueError(f"unknown scenario {scenario}")


def place_uniform(topo: Topology, k: int, rnd) -> CompromisedSet:
    """k distinct non-sink nodes, uniform without replacement."""
    if k >= topo.node_count:
        raise PlacementError(f"k={k} must be below node_count={topo.node_count}")
    sensors = [i for i in range(topo.node_count) if i != topo.sink]
    return CompromisedSet(frozenset(rnd.sample(sensors, k)))


def region_bounds(side: float) -> tuple[float, float]:
    """The sinkhole square around the sink: area one quarter of the field."""
    return side / 4.0, 3.0 * side / 4.0


def region_members(topo: Topology) -> list[int]:
    lo, hi = region_bounds(topo.side)
    return [
        i
        for i in range(topo.node_count)
        if i != topo.sink
        and lo <= topo.positions[i][0] <= hi
        and lo <= topo.positions[i][1] <= hi
    ]


def place_sinkhole(topo: Topology, k: int, rnd) -> CompromisedSet:
    """k distinct nodes uniform among the sensors inside the sinkhole region."""
    if k >= topo.node_count:
        raise PlacementError(f"k={k} must be below node_count={topo.node_count}")
    members = region_members(topo)
    if len(members) < k:
        raise PlacementError(f"region population {len(members)} < k={k}")
    return CompromisedSet(frozenset(rnd.sample(members, k)))


class Adversary:
    """Per-trial attacker state the protocols consult on their hot paths."""

    def __init__(
        self,
        topo: Topology,
        cfg: AdversaryConfig,
        compromised: CompromisedSet,
        attack_rnd,
        sybil_rnd=None,
        malicious_generate_data: bool = True,
    ):
        n = topo.node_count
        self.cfg = cfg
        self.compromised = compromised
        self.is_compromised = [False] * n
        for i in compromised.ids:
            self.is_compromised[i] = True
        self.p_f = cfg.p_f
        self._attack_rnd = attack_rnd
        self.malicious_generate_data = malicious_generate_data

        drops = cfg.behavior in (SELECTIVE_FORWARD, FALSE_RREP, FALSE_INTEREST)
        self.drops_transit = [drops and c for c in self.is_compromised]
        # p_f softens selective forwarding only; false-control attackers
        # drop every transit DATA packet unconditionally
        self._pf_applies = cfg.behavior == SELECTIVE_FORWARD
        self.sybil = [
            cfg.behavior == SYBIL_HELLO and c for c in self.is_compromised
        ]
        self.false_rrep = [
            cfg.behavior == FALSE_RREP and c for c in self.is_compromised
        ]
        self.false_interest = [
            cfg.behavior == FALSE_INTEREST and c for c in self.is_compromised
        ]

        self._sybil_rnd = sybil_rnd
        self._sybil_pool: dict[int, list[int]] = {}
        if cfg.behavior == SYBIL_HELLO:
            # fabricated ids live in [0, node_count] inclusive, minus the
            # attacker's own id and its physical neighbors' true ids
            for node in compromised.ids:
                banned = set(topo.adjacency[node])
                banned.add(node)
                self._sybil_pool[node] = [
                    i for i in range(n + 1) if i not in banned
                ]

    def selective_forward_filter(self, node: int, pkt) -> bool:
        """True if this compromised node discards the transit DATA packet."""
        if not self._pf_applies:
            return True
        p_f = self.p_f
        if p_f == 0.0:
            return True
        if p_f == 1.0:
            return False
        return self._attack_rnd.random() >= p_f

    def draw_sybil_id(self, node: int) -> int:
        pool = self._sybil_pool[node]
        return pool[self._sybil_rnd.randrange(len(pool))]

    def generates_data(self, node: int) -> bool:
        if not self.is_compromised[node]:
            return True
        return self.malicious_generate_data


def null_adversary(topo: Topology) -> Adversary:
    cfg = AdversaryConfig(placement="uniform", k=0, behavior=SELECTIVE_FORWARD)
    return Adversary(topo, cfg, CompromisedSet(frozenset()), attack_rnd=None)
