"""The four routing behaviors as per-node state machines.

DSR   on-demand source routing: one RREQ flood per source, sink-only RREPs,
      first reply wins, full source route in every DATA header.
GBR   gradient-based routing: the sink floods an INTEREST at t=0, nodes adopt
      height = min neighbor height + 1 and forward DATA to a uniformly chosen
      neighbor one height below.
GF    greedy geographic forwarding over claimed neighbor positions, strict
      progress toward the sink, drop at a local minimum.
RWR   random-walk routing: uniform choice over the alive neighbor table,
      previous hop not excluded.

GF and RWR share the HELLO/neighbor-table machinery (periodic HELLO every
hello_period, staleness eviction after purge_period, entries keyed by the
claimed identity in the HELLO). DSR and GBR establish routes by flooding and
run no HELLO machinery.

A packet that finds no next hop during the first HELLO round (or before the
INTEREST flood reaches its origin) is held in a per-node pending buffer and
retried as the tables fill in; once the network is warm the same condition is
a terminal no_next_hop drop. Leftovers are converted to no_next_hop drops by
finalize(), so every generated packet ends in exactly one bucket.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .adversary import Adversary
from .engine import (
    DATA,
    EV_HELLO_TICK,
    EV_SAMPLE,
    EV_TRAFFIC,
    HELLO,
    INTEREST,
    RREP,
    RREQ,
    Engine,
    Packet,
)
from .metrics import RunMetrics
from .topology import Topology

# first degree sample: past one full purge window, so tables are steady
DEGREE_SAMPLE_START = 8.0


@dataclass
class RunContext:
    """Everything one protocol instance needs to drive one trial."""

    topo: Topology
    metrics: RunMetrics
    adversary: Adversary
    ttl: int
    hello_period: float
    purge_period: float
    sim_time: float
    traffic_times: list[list[float]]  # per node, ascending generation times
    hello_phase: list[float] | None  # per node, GF/RWR only
    choices_rnd: random.Random | None


class _BaseProtocol:
    """Traffic generation, the DATA pipeline, and the pending buffer."""

    name = ""
    uses_hello = False

    def __init__(self, engine: Engine, ctx: RunContext):
        self.engine = engine
        self.ctx = ctx
        topo = ctx.topo
        self.n = topo.node_count
        self.sink = topo.sink
        self.adjacency = topo.adjacency
        self.metrics = ctx.metrics
        self.adv = ctx.adversary
        self.ttl_initial = ctx.ttl
        self.sim_time = ctx.sim_time
        self.rnd = ctx.choices_rnd
        self.dist = topo.dist_to_sink.tolist()
        self.traffic_times = ctx.traffic_times
        self.tptr = [0] * self.n
        self.pending: list[list[Packet]] = [[] for _ in range(self.n)]
        self._warmup_end = ctx.hello_period + 2.0 * engine.delta_hop
        engine.on_unicast = self._on_unicast
        engine.on_broadcast = self._on_broadcast
        engine.on_traffic = self._on_traffic

    def start(self) -> None:
        raise NotImplementedError

    def _next_hop(self, node: int) -> int | None:
        raise NotImplementedError

    def _on_broadcast(self, sender: int, pkt: Packet) -> None:
        raise NotImplementedError

    def _start_traffic(self) -> None:
        eng = self.engine
        adv = self.adv
        for node, times in enumerate(self.traffic_times):
            if times and adv.generates_data(node):
                eng.schedule(times[0], EV_TRAFFIC, node)

    def _on_traffic(self, node: int) -> None:
        self.metrics.count_generated(node)
        self._originate(node, Packet(DATA, node, ttl=self.ttl_initial))
        times = self.traffic_times[node]
        i = self.tptr[node] + 1
        if i < len(times):
            self.tptr[node] = i
            self.engine.schedule(times[i], EV_TRAFFIC, node)

    def _originate(self, node: int, pkt: Packet) -> None:
        self._dispatch_data(node, pkt)

    def _dispatch_data(self, node: int, pkt: Packet) -> None:
        nh = self._next_hop(node)
        if nh is None:
            self._no_route(node, pkt)
        else:
            pkt.ttl -= 1
            pkt.hops += 1
            self.engine.deliver_unicast(node, nh, pkt)

    def forward_data(self, node: int, pkt: Packet) -> None:
        """Transit hop at a non-sink node: TTL gate, then protocol next hop."""
        if pkt.ttl == 0:
            self.metrics.drop_ttl(pkt)
            return
        self._dispatch_data(node, pkt)

    def _on_unicast(self, node: int, sender: int, pkt: Packet) -> None:
        # DATA is the only unicast kind on GBR/GF/RWR
        if node == self.sink:
            self.metrics.deliver(pkt)
            return
        adv = self.adv
        if adv.drops_transit[node] and adv.selective_forward_filter(node, pkt):
            self.metrics.drop_malicious(pkt)
            return
        self.forward_data(node, pkt)

    def _no_route(self, node: int, pkt: Packet) -> None:
        if self.engine.clock < self._warmup_end:
            self.pending[node].append(pkt)
        else:
            self.metrics.drop_no_route(pkt)

    def _flush(self, node: int) -> None:
        buf = self.pending[node]
        if not buf:
            return
        self.pending[node] = []
        for pkt in buf:
            # unsendable packets re-enter pending via _no_route, in order
            self._dispatch_data(node, pkt)

    def finalize(self) -> None:
        """End of run: whatever is still held never found a next hop."""
        m = self.metrics
        for buf in self.pending:
            for pkt in buf:
                m.drop_no_route(pkt)
            buf.clear()


class _HelloProtocol(_BaseProtocol):
    """Neighbor tables fed by periodic HELLO broadcasts (GF and RWR).

    Table entries are keyed by the *claimed* identity in the HELLO and store
    [last_heard, x, y, dist_to_sink, in_id_list]. Entries are never deleted;
    aliveness is last_heard within purge_period, checked lazily wherever an
    entry is consulted. id_lists holds each identity at most once (tracked by
    the in_id_list flag) and backs RWR's uniform draw.
    """

    uses_hello = True

    def __init__(self, engine: Engine, ctx: RunContext):
        super().__init__(engine, ctx)
        n = self.n
        self.tables: list[dict[int, list]] = [{} for _ in range(n)]
        self.id_lists: list[list[int]] = [[] for _ in range(n)]
        self.hello_period = ctx.hello_period
        self.purge_period = ctx.purge_period
        self.hello_phase = ctx.hello_phase
        self.pos = [(float(x), float(y)) for x, y in ctx.topo.positions]
        engine.on_hello_tick = self.hello_tick
        engine.on_sample = self._on_sample

    def start(self) -> None:
        eng = self.engine
        for node, phase in enumerate(self.hello_phase):
            eng.schedule(phase, EV_HELLO_TICK, node)
        t = DEGREE_SAMPLE_START
        while t < self.sim_time - 1e-9:
            eng.schedule(t, EV_SAMPLE, 0)
            t += 1.0
        self._start_traffic()

    def hello_tick(self, node: int) -> None:
        eng = self.engine
        if self.adv.sybil[node]:
            self.sybil_hello_tick(node)
        else:
            x, y = self.pos[node]
            eng.deliver_broadcast(
                node, Packet(HELLO, node, aux=(x, y, self.dist[node]))
            )
        nxt = eng.clock + self.hello_period
        if nxt <= self.sim_time:
            eng.schedule(nxt, EV_HELLO_TICK, node)

    def sybil_hello_tick(self, node: int) -> None:
        """Fresh fabricated identity per HELLO; position stays truthful."""
        x, y = self.pos[node]
        cid = self.adv.draw_sybil_id(node)
        self.engine.deliver_broadcast(
            node, Packet(HELLO, cid, aux=(x, y, self.dist[node]))
        )

    def _on_broadcast(self, sender: int, pkt: Packet) -> None:
        on_hello = self.on_hello
        for nb in self.adjacency[sender]:
            on_hello(nb, pkt)

    def on_hello(self, node: int, pkt: Packet) -> None:
        cid = pkt.origin
        tbl = self.tables[node]
        ent = tbl.get(cid)
        now = self.engine.clock
        if ent is None:
            x, y, d = pkt.aux
            tbl[cid] = [now, x, y, d, True]
            self.id_lists[node].append(cid)
            self._entry_alive(node, cid, d)
        else:
            ent[0] = now
            if not ent[4]:
                ent[4] = True
                self.id_lists[node].append(cid)
                d = pkt.aux[2]
                if ent[3] != d:
                    ent[1], ent[2], ent[3] = pkt.aux
                    self._entry_moved(node, cid, d)
                self._entry_alive(node, cid, d)
            else:
                d = pkt.aux[2]
                if ent[3] != d:
                    # same claimed identity from a different physical node
                    ent[1], ent[2], ent[3] = pkt.aux
                    self._entry_moved(node, cid, d)
        if self.pending[node]:
            self._flush(node)

    def _entry_alive(self, node: int, cid: int, d: float) -> None:
        pass

    def _entry_moved(self, node: int, cid: int, d: float) -> None:
        pass

    def _on_sample(self) -> None:
        now = self.engine.clock
        purge = self.purge_period
        out = self.metrics.degree_samples
        for tbl in self.tables:
            c = 0
            for ent in tbl.values():
                if now - ent[0] <= purge:
                    c += 1
            out.append(c)


class GfProtocol(_HelloProtocol):
    """Greedy forwarding: strictly closer to the sink, smallest id on ties.

    The best alive candidate per node is cached as (distance, identity) and
    invalidated lazily: a stale or repositioned cached entry forces a rescan
    on the next draw, and upserts keep the cache ahead of better arrivals.
    """

    name = "gf"

    def __init__(self, engine: Engine, ctx: RunContext):
        super().__init__(engine, ctx)
        self.cache: list[tuple[float, int] | None] = [None] * self.n

    def gf_next_hop(self, node: int) -> int | None:
        tbl = self.tables[node]
        now = self.engine.clock
        purge = self.purge_period
        c = self.cache[node]
        if c is not None:
            d, cid = c
            ent = tbl.get(cid)
            if ent is not None and ent[3] == d and now - ent[0] <= purge:
                return cid
        own = self.dist[node]
        best_id = None
        best_d = own
        for cid, ent in tbl.items():
            if now - ent[0] > purge:
                continue
            ed = ent[3]
            if ed < best_d or (ed == best_d and best_id is not None and cid < best_id):
                best_d = ed
                best_id = cid
        self.cache[node] = None if best_id is None else (best_d, best_id)
        return best_id

    _next_hop = gf_next_hop

    def _entry_alive(self, node: int, cid: int, d: float) -> None:
        if d < self.dist[node]:
            c = self.cache[node]
            if c is not None and (d < c[0] or (d == c[0] and cid < c[1])):
                self.cache[node] = (d, cid)

    def _entry_moved(self, node: int, cid: int, d: float) -> None:
        c = self.cache[node]
        if c is None:
            return
        if c[1] == cid:
            self.cache[node] = None
        elif d < self.dist[node] and (d < c[0] or (d == c[0] and cid < c[1])):
            self.cache[node] = (d, cid)


class RwrProtocol(_HelloProtocol):
    """Random-walk routing over the alive table."""

    name = "rwr"

    def rwr_next_hop(self, node: int) -> int | None:
        lst = self.id_lists[node]
        tbl = self.tables[node]
        now = self.engine.clock
        purge = self.purge_period
        rnd = self.rnd
        while lst:
            i = rnd.randrange(len(lst))
            cid = lst[i]
            ent = tbl[cid]
            if now - ent[0] <= purge:
                return cid
            # swap-pop the stale id; uniform over what remains
            ent[4] = False
            last = lst.pop()
            if i < len(lst):
                lst[i] = last
        return None

    _next_hop = rwr_next_hop


class GbrProtocol(_BaseProtocol):
    """Gradient-based routing.

    height starts infinite (0 at the sink) and only ever improves; parents
    holds exactly the neighbors whose recorded advertised height equals
    height - 1, maintained incrementally and rebuilt on height change.
    """

    name = "gbr"

    def __init__(self, engine: Engine, ctx: RunContext):
        super().__init__(engine, ctx)
        n = self.n
        self.height: list[float] = [math.inf] * n
        self.height[self.sink] = 0
        self.heights: list[dict[int, int]] = [{} for _ in range(n)]
        self.parents: list[list[int]] = [[] for _ in range(n)]
        self.advertised_once = [False] * n

    def start(self) -> None:
        # the gradient is provided once, at the beginning
        self.engine.deliver_broadcast(self.sink, Packet(INTEREST, self.sink, aux=0))
        self._start_traffic()

    def _on_broadcast(self, sender: int, pkt: Packet) -> None:
        on_interest = self.gbr_on_interest
        for nb in self.adjacency[sender]:
            on_interest(nb, pkt)

    def gbr_on_interest(self, node: int, pkt: Packet) -> None:
        if node == self.sink:
            return
        sender = pkt.origin
        h_adv = pkt.aux
        adv_mask = self.adv.false_interest
        if adv_mask[node] and not self.advertised_once[node]:
            self.false_interest(node, pkt)
        tbl = self.heights[node]
        old = tbl.get(sender)
        if old is not None and old <= h_adv:
            return
        tbl[sender] = h_adv
        h = self.height[node]
        if h_adv + 1 < h:
            nh = h_adv + 1
            self.height[node] = nh
            self.parents[node] = [m for m, hm in tbl.items() if hm == nh - 1]
            if not adv_mask[node]:
                self.engine.deliver_broadcast(node, Packet(INTEREST, node, aux=nh))
            if self.pending[node]:
                self._flush(node)
        else:
            if old == h - 1:
                # monotone adverts: the sender just left the parent height
                self.parents[node].remove(sender)
            if h_adv == h - 1:
                self.parents[node].append(sender)
                if self.pending[node]:
                    self._flush(node)

    def false_interest(self, node: int, pkt: Packet) -> None:
        """Advertise height 1 once; never advertise anything honest after."""
        self.advertised_once[node] = True
        self.engine.deliver_broadcast(node, Packet(INTEREST, node, aux=1))

    def gbr_next_hop(self, node: int) -> int | None:
        p = self.parents[node]
        n = len(p)
        if n == 0:
            return None
        if n == 1:
            return p[0]
        return p[self.rnd.randrange(n)]

    _next_hop = gbr_next_hop


class DsrProtocol(_BaseProtocol):
    """On-demand source routing with sink-only replies.

    Per-node state: the accepted route (first RREP wins, kept for the whole
    run), a discovery-outstanding flag, the FIFO pending buffer, and the RREQ
    dedup set. One discovery per source per run means the flood origin id
    alone identifies a flood in the dedup set.
    """

    name = "dsr"

    # Reply processing hold at the sink, in hop-delays. Must stay odd so a
    # held genuine reply can never share an arrival timestamp with a forged
    # one (forged arrivals land on even hop-delay multiples).
    RREP_HOLD_HOPS = 3

    def __init__(self, engine: Engine, ctx: RunContext):
        super().__init__(engine, ctx)
        n = self.n
        self.route: list[list[int] | None] = [None] * n
        self.discovering = [False] * n
        self.seen: list[set[int]] = [set() for _ in range(n)]

    def start(self) -> None:
        self._start_traffic()

    def dsr_send_data(self, node: int, pkt: Packet) -> None:
        rt = self.route[node]
        if rt is not None:
            pkt.route = rt
            pkt.route_pos = 1
            pkt.ttl -= 1
            pkt.hops += 1
            self.engine.deliver_unicast(node, rt[1], pkt)
            return
        if not self.discovering[node]:
            self.discovering[node] = True
            self.seen[node].add(node)
            self.engine.deliver_broadcast(node, Packet(RREQ, node, route=[node]))
        self.pending[node].append(pkt)

    _originate = dsr_send_data

    def _on_broadcast(self, sender: int, pkt: Packet) -> None:
        # RREQ flood expansion; the dedup test is inlined because it filters
        # the vast majority of receiver events
        origin = pkt.origin
        seen = self.seen
        on_rreq = self.dsr_on_rreq
        for nb in self.adjacency[sender]:
            if origin in seen[nb]:
                continue
            on_rreq(nb, pkt)

    def dsr_on_rreq(self, node: int, pkt: Packet) -> None:
        origin = pkt.origin
        s = self.seen[node]
        if origin in s:
            return
        s.add(origin)
        if node == self.sink:
            rt = pkt.route + [node]
            rp = Packet(RREP, origin, route=rt, route_pos=len(rt) - 2)
            # The sink holds its reply for RREP_HOLD_HOPS hop-delays; a forged
            # reply skips the hold, so it wins the race whenever its sender is
            # at most one hop farther from the source than the sink is.
            hold = self.RREP_HOLD_HOPS * self.engine.delta_hop
            self.engine.deliver_unicast(node, rt[-2], rp, extra_delay=hold)
            return
        if self.adv.false_rrep[node]:
            self.false_rrep(node, pkt)
        self.engine.deliver_broadcast(node, Packet(RREQ, origin, route=pkt.route + [node]))

    def false_rrep(self, node: int, rreq: Packet) -> None:
        """Claim sink adjacency: reply [accumulated..., self, sink]."""
        rt = rreq.route + [node, self.sink]
        i = len(rt) - 3
        rp = Packet(RREP, rreq.origin, route=rt, route_pos=i)
        self.engine.deliver_unicast(node, rt[i], rp)

    def dsr_on_rrep(self, node: int, pkt: Packet) -> None:
        rt = pkt.route
        pos = pkt.route_pos
        if rt[pos] != node:
            self.metrics.protocol_errors += 1
            return
        if pos > 0:
            pkt.route_pos = pos - 1
            self.engine.deliver_unicast(node, rt[pos - 1], pkt)
            return
        # at the source: first RREP settles the discovery
        if self.route[node] is not None or not self.discovering[node]:
            return
        self.route[node] = rt
        self.discovering[node] = False
        comp = self.adv.is_compromised
        for x in rt[1:]:
            if comp[x]:
                self.metrics.dsr_impacted_sources += 1
                break
        buf = self.pending[node]
        self.pending[node] = []
        eng = self.engine
        nxt = rt[1]
        for p in buf:
            p.route = rt
            p.route_pos = 1
            p.ttl -= 1
            p.hops += 1
            eng.deliver_unicast(node, nxt, p)

    def _on_unicast(self, node: int, sender: int, pkt: Packet) -> None:
        if pkt.kind == DATA:
            if node == self.sink:
                self.metrics.deliver(pkt)
                return
            adv = self.adv
            if adv.drops_transit[node] and adv.selective_forward_filter(node, pkt):
                self.metrics.drop_malicious(pkt)
                return
            if pkt.ttl == 0:
                self.metrics.drop_ttl(pkt)
                return
            rt = pkt.route
            pos = pkt.route_pos
            if rt is None or rt[pos] != node:
                # not where the source route says it should be
                self.metrics.drop_no_route(pkt)
                self.metrics.protocol_errors += 1
                return
            pkt.route_pos = pos + 1
            pkt.ttl -= 1
            pkt.hops += 1
            self.engine.deliver_unicast(node, rt[pos + 1], pkt)
        else:
            self.dsr_on_rrep(node, pkt)


PROTOCOLS: dict[str, type[_BaseProtocol]] = {
    "dsr": DsrProtocol,
    "gbr": GbrProtocol,
    "gf": GfProtocol,
    "rwr": RwrProtocol,
}

PROTOCOL_NAMES = tuple(PROTOCOLS)
HELLO_PROTOCOLS = frozenset(name for name, cls in PROTOCOLS.items() if cls.uses_hello)
