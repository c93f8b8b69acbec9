"""Per-trial measurement and cross-trial aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import stats


class RunMetrics:
    """Raw measurements of one trial.

    Every generated DATA packet ends in exactly one bucket: delivered, one of
    the drop counters, or (transiently) in flight. protocol_errors tracks
    impossible states and malformed control packets; it stays zero in any
    healthy run.
    """

    __slots__ = (
        "node_count",
        "generated",
        "generated_total",
        "delivered",
        "dropped_malicious",
        "dropped_ttl",
        "dropped_phantom",
        "dropped_no_route",
        "protocol_errors",
        "degree_samples",
        "dsr_impacted_sources",
    )

    def __init__(self, node_count: int):
        self.node_count = node_count
        self.generated = [0] * node_count  # per-origin counts
        self.generated_total = 0
        self.delivered: list[tuple[int, int]] = []  # (origin, hops_traversed)
        self.dropped_malicious = 0
        self.dropped_ttl = 0
        self.dropped_phantom = 0
        self.dropped_no_route = 0
        self.protocol_errors = 0
        self.degree_samples: list[int] = []
        self.dsr_impacted_sources = 0

    # hot-path hooks (the engine and protocols call these)

    def count_generated(self, origin: int) -> None:
        self.generated[origin] += 1
        self.generated_total += 1

    def deliver(self, pkt) -> None:
        self.delivered.append((pkt.origin, pkt.hops))

    def drop_malicious(self, pkt) -> None:
        self.dropped_malicious += 1

    def drop_ttl(self, pkt) -> None:
        self.dropped_ttl += 1

    def drop_phantom(self, pkt) -> None:
        self.dropped_phantom += 1

    def drop_no_route(self, pkt) -> None:
        self.dropped_no_route += 1

    # accounting

    def dropped_total(self) -> int:
        return (
            self.dropped_malicious
            + self.dropped_ttl
            + self.dropped_phantom
            + self.dropped_no_route
        )

    def in_flight(self) -> int:
        # protocol_errors is deliberately absent: control packets are not in
        # the generated pool, and an errored DATA packet is also booked in a
        # drop bucket
        return self.generated_total - len(self.delivered) - self.dropped_total()


def delivery_ratio(m: RunMetrics) -> float:
    """Sink-received DATA over sensor-generated DATA."""
    if m.generated_total == 0:
        raise ValueError("no generated packets: delivery ratio undefined")
    return len(m.delivered) / m.generated_total


def average_path_length(m: RunMetrics) -> float | None:
    """Mean hops over delivered packets; None when nothing was delivered."""
    if not m.delivered:
        return None
    return sum(hops for _, hops in m.delivered) / len(m.delivered)


def average_degree(m: RunMetrics) -> float | None:
    """Mean over all (node, sample time) neighbor-table sizes."""
    if not m.degree_samples:
        return None
    return sum(m.degree_samples) / len(m.degree_samples)


def aggregate(values: list[float]) -> tuple[float, float | None]:
    """Sample mean and 95% CI half-width t_{0.975,n-1} * s / sqrt(n)."""
    n = len(values)
    if n == 0:
        raise ValueError("aggregate of empty sample")
    mean = sum(values) / n
    if n < 2:
        return mean, None
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    half = float(stats.t.ppf(0.975, n - 1)) * math.sqrt(var / n)
    return mean, half


def safe_route_probability(p_c: float, length: int) -> float:
    """Probability that an l-hop route avoids compromise: (1 - p_c)^l."""
    if not 0.0 <= p_c <= 1.0:
        raise ValueError("p_c must be in [0, 1]")
    if length < 0:
        raise ValueError("length must be >= 0")
    return (1.0 - p_c) ** length


@dataclass
class AggregateRow:
    scenario: int
    protocol: str
    k: int
    metric: str
    mean: float
    ci95: float | None
    trials: int
