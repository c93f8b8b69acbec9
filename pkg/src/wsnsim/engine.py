"""Deterministic discrete-event core.

One engine instance drives one trial: a lexicographic (time, sequence) event
queue, an ideal MAC (no loss, no collisions, fixed per-hop latency) and the
Poisson traffic helper. Protocol behavior is attached through the handler
slots; the engine itself knows nothing about routing beyond the physical
adjacency it uses to gate deliveries.
"""

from __future__ import annotations

import heapq
import math

# event kinds
EV_UNICAST = 0
EV_BCAST = 1
EV_HELLO_TICK = 2
EV_TRAFFIC = 3
EV_SAMPLE = 4

EVENT_NAMES = ("unicast", "broadcast", "hello_tick", "traffic", "sample")

# packet kinds
DATA = 0
HELLO = 1
RREQ = 2
RREP = 3
INTEREST = 4

PACKET_NAMES = ("DATA", "HELLO", "RREQ", "RREP", "INTEREST")


class Packet:
    """Tagged packet: kind plus whichever fields the kind uses.

    ttl counts remaining transmissions: a hop requires ttl > 0 and decrements
    it, so a packet traverses at most ttl_initial edges. route/route_pos carry
    a full source route and the index of the current holder (DSR DATA and
    RREP); aux carries the advertised height of an INTEREST.
    """

    __slots__ = ("kind", "origin", "seq", "ttl", "hops", "route", "route_pos", "aux")

    def __init__(self, kind, origin, seq=0, ttl=0, hops=0, route=None, route_pos=0, aux=0):
        self.kind = kind
        self.origin = origin
        self.seq = seq
        self.ttl = ttl
        self.hops = hops
        self.route = route
        self.route_pos = route_pos
        self.aux = aux

    def __repr__(self) -> str:  # debugging aid only
        return (
            f"Packet({PACKET_NAMES[self.kind]}, origin={self.origin}, seq={self.seq}, "
            f"ttl={self.ttl}, hops={self.hops})"
        )


def poisson_next_interarrival(rng, lam: float) -> float:
    """Exponential inter-arrival draw: -ln(U)/lam for U uniform in (0, 1]."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    u = 1.0 - rng.random()
    return -math.log(u) / lam


class Engine:
    """Single-threaded event loop over one topology.

    Handlers (assigned by the protocol instance before running):
      on_unicast(target, sender, pkt)   packet arrival at its true destination
      on_broadcast(sender, pkt)         broadcast reaching all neighbors of
                                        sender simultaneously; the handler
                                        iterates the receivers itself
      on_hello_tick(node)               periodic HELLO timer
      on_traffic(node)                  DATA generation instant at node
      on_sample()                       metric sampling instant
    """

    def __init__(self, topo, delta_hop: float, counters, trace=None):
        self.topo = topo
        self.adjacency = topo.adjacency
        self.adjacency_sets = topo.adjacency_sets
        self.delta_hop = delta_hop
        self.counters = counters
        self.clock = 0.0
        self._heap: list = []
        self._seq = 0
        self.trace = trace  # callable(str) or None
        self.on_unicast = None
        self.on_broadcast = None
        self.on_hello_tick = None
        self.on_traffic = None
        self.on_sample = None

    def schedule(self, time: float, kind: int, target: int, payload=None) -> None:
        assert time >= self.clock, "scheduling into the past"
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, kind, target, payload))

    def deliver_broadcast(self, sender: int, pkt: Packet) -> None:
        """All physical neighbors of sender receive pkt at clock + delta_hop."""
        self.schedule(self.clock + self.delta_hop, EV_BCAST, sender, pkt)

    def deliver_unicast(
        self, sender: int, dest_identity: int, pkt: Packet, extra_delay: float = 0.0
    ) -> None:
        """Deliver iff dest_identity is the true id of a physical neighbor.

        Anything else (a fabricated identity, or a real node out of range) is
        lost on the air: DATA is counted dropped(phantom_next_hop), control
        packets as protocol errors.
        """
        if dest_identity in self.adjacency_sets[sender]:
            self.schedule(
                self.clock + self.delta_hop + extra_delay,
                EV_UNICAST,
                dest_identity,
                (sender, pkt),
            )
        elif pkt.kind == DATA:
            self.counters.drop_phantom(pkt)
        else:
            self.counters.protocol_errors += 1

    def pending_events(self) -> int:
        return len(self._heap)

    def _dispatch(self, kind: int, target: int, payload) -> None:
        if kind == EV_UNICAST:
            sender, pkt = payload
            self.on_unicast(target, sender, pkt)
        elif kind == EV_BCAST:
            self.on_broadcast(target, payload)
        elif kind == EV_TRAFFIC:
            self.on_traffic(target)
        elif kind == EV_HELLO_TICK:
            self.on_hello_tick(target)
        elif kind == EV_SAMPLE:
            self.on_sample()
        else:
            raise RuntimeError(f"unknown event kind {kind}")

    def run_until(self, t_end: float) -> None:
        """Process every event with time <= t_end; leave clock at t_end."""
        assert t_end >= self.clock
        heap = self._heap
        trace = self.trace
        while heap:
            if heap[0][0] > t_end:
                break
            time, _, kind, target, payload = heapq.heappop(heap)
            self.clock = time
            if trace is not None:
                trace(self._trace_line(time, kind, target, payload))
            self._dispatch(kind, target, payload)
        self.clock = t_end

    def run(self) -> None:
        """Drain the queue completely (in-flight traffic settles past t_end)."""
        heap = self._heap
        trace = self.trace
        pop = heapq.heappop
        on_unicast = self.on_unicast
        on_broadcast = self.on_broadcast
        while heap:
            time, _, kind, target, payload = pop(heap)
            self.clock = time
            if trace is not None:
                trace(self._trace_line(time, kind, target, payload))
            if kind == EV_UNICAST:
                sender, pkt = payload
                on_unicast(target, sender, pkt)
            elif kind == EV_BCAST:
                on_broadcast(target, payload)
            elif kind == EV_TRAFFIC:
                self.on_traffic(target)
            elif kind == EV_HELLO_TICK:
                self.on_hello_tick(target)
            else:
                self.on_sample()

    def _trace_line(self, time: float, kind: int, target: int, payload) -> str:
        if kind == EV_UNICAST:
            detail = repr(payload[1])
        elif kind == EV_BCAST:
            detail = repr(payload)
        else:
            detail = ""
        return f"{time:.6f},{target},{EVENT_NAMES[kind]},{detail}"
