import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import line_topology
from wsnsim.engine import (
    DATA,
    EV_BCAST,
    EV_TRAFFIC,
    EV_UNICAST,
    RREP,
    Engine,
    Packet,
    poisson_next_interarrival,
)
from wsnsim.metrics import RunMetrics


def make_engine(topo, delta=0.001):
    m = RunMetrics(topo.node_count)
    e = Engine(topo, delta, m)
    return e, m


def attach_recorders(e):
    log = []
    e.on_unicast = lambda target, sender, pkt: log.append(
        ("uni", e.clock, target, sender, pkt)
    )
    e.on_broadcast = lambda sender, pkt: log.append(("bc", e.clock, sender, pkt))
    e.on_traffic = lambda node: log.append(("traffic", e.clock, node))
    e.on_hello_tick = lambda node: log.append(("hello", e.clock, node))
    e.on_sample = lambda: log.append(("sample", e.clock))
    return log


def test_equal_time_events_run_in_insertion_order():
    e, _ = make_engine(line_topology(3))
    log = attach_recorders(e)
    for node in (2, 0, 3, 1):
        e.schedule(5.0, EV_TRAFFIC, node)
    e.run()
    assert [entry[2] for entry in log] == [2, 0, 3, 1]
    assert e.clock == 5.0


@settings(max_examples=60, deadline=None)
@given(
    times=st.lists(
        st.floats(0.0, 100.0, allow_nan=False, allow_infinity=False),
        min_size=1,
        max_size=40,
    )
)
def test_dispatch_order_matches_stable_sort_oracle(times):
    e, _ = make_engine(line_topology(2))
    log = attach_recorders(e)
    for idx, t in enumerate(times):
        e.schedule(t, EV_TRAFFIC, idx)
    e.run()
    expect = [idx for _, idx in sorted(zip(times, range(len(times))), key=lambda p: p[0])]
    assert [entry[2] for entry in log] == expect


def test_scheduling_into_the_past_asserts():
    e, _ = make_engine(line_topology(2))
    log = attach_recorders(e)
    e.schedule(4.0, EV_TRAFFIC, 1)
    e.on_traffic = lambda node: e.schedule(3.0, EV_TRAFFIC, node)
    with pytest.raises(AssertionError):
        e.run()


def test_run_until_processes_inclusive_boundary():
    e, _ = make_engine(line_topology(3))
    log = attach_recorders(e)
    e.schedule(1.0, EV_TRAFFIC, 1)
    e.schedule(1.5, EV_TRAFFIC, 2)
    e.schedule(2.0, EV_TRAFFIC, 3)
    e.run_until(1.5)
    assert [entry[2] for entry in log] == [1, 2]
    assert e.clock == 1.5
    e.run()
    assert [entry[2] for entry in log] == [1, 2, 3]


def test_broadcast_is_one_event_at_one_hop_latency():
    topo = line_topology(4)
    e, _ = make_engine(topo, delta=0.25)
    log = attach_recorders(e)
    pkt = Packet(DATA, 2)
    e.deliver_broadcast(2, pkt)
    e.run()
    assert log == [("bc", 0.25, 2, pkt)]


def test_unicast_to_neighbor_arrives_after_delta():
    topo = line_topology(4)
    e, _ = make_engine(topo, delta=0.5)
    log = attach_recorders(e)
    pkt = Packet(DATA, 1)
    e.deliver_unicast(1, 2, pkt)
    e.run()
    assert log == [("uni", 0.5, 2, 1, pkt)]


def test_unicast_extra_delay_shifts_arrival():
    topo = line_topology(4)
    e, _ = make_engine(topo, delta=0.5)
    log = attach_recorders(e)
    e.deliver_unicast(1, 2, Packet(DATA, 1), extra_delay=1.25)
    e.run()
    assert log[0][1] == 0.5 + 1.25


def test_unicast_to_phantom_identity_books_data_drop():
    topo = line_topology(4)
    e, m = make_engine(topo)
    attach_recorders(e)
    m.count_generated(1)
    e.deliver_unicast(1, 99, Packet(DATA, 1))
    e.run()
    assert m.dropped_phantom == 1
    assert m.protocol_errors == 0


def test_unicast_out_of_range_control_is_protocol_error():
    topo = line_topology(4)
    e, m = make_engine(topo)
    attach_recorders(e)
    e.deliver_unicast(1, 3, Packet(RREP, 1))  # 3 exists but is not adjacent to 1
    e.run()
    assert m.protocol_errors == 1
    assert m.dropped_phantom == 0


class _StubRng:
    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


def test_poisson_inverse_transform_unit_point():
    # U = 1 - e^-1 makes -ln(1-U) exactly one mean interval
    rng = _StubRng(1.0 - math.exp(-1.0))
    assert poisson_next_interarrival(rng, 1.0) == pytest.approx(1.0, rel=1e-12)
    assert poisson_next_interarrival(rng, 4.0) == pytest.approx(0.25, rel=1e-12)


def test_poisson_rejects_bad_rate():
    with pytest.raises(ValueError):
        poisson_next_interarrival(random.Random(0), 0.0)


def test_poisson_mean_and_positivity_large_sample():
    rnd = random.Random(5)
    n = 1_000_000
    draws = [poisson_next_interarrival(rnd, 2.0) for _ in range(n)]
    assert all(d > 0.0 for d in draws)
    mean = sum(draws) / n
    # exponential(rate 2): mean 0.5, sd 0.5; allow 4 sigma of the estimator
    assert abs(mean - 0.5) < 4 * 0.5 / math.sqrt(n)
