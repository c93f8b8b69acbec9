"""Scenario orchestration: configuration, per-trial wiring, CSV emission.

Seed hygiene: every random concern draws from its own stream, derived from
(master_seed, trial_index, stream id, ...) with a stable 64-bit digest. The
topology and offered-traffic streams incorporate nothing but the trial index,
so a trial's field and workload are byte-identical across scenarios,
protocols and k; placement, attack, sybil and per-hop choice streams key in
exactly the parameters that should perturb them.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, replace

import numpy as np

from .adversary import (
    SCENARIO_PLACEMENTS,
    SYBIL_HELLO,
    Adversary,
    AdversaryConfig,
    CompromisedSet,
    PlacementError,
    behavior_for,
    place_sinkhole,
    place_uniform,
)
from .engine import Engine, poisson_next_interarrival
from .metrics import (
    AggregateRow,
    RunMetrics,
    aggregate,
    average_degree,
    average_path_length,
    delivery_ratio,
)
from .protocols import HELLO_PROTOCOLS, PROTOCOLS, RunContext
from .topology import Topology, sample_until_connected

SCENARIO_PROTOCOLS = {
    1: ("dsr", "gbr", "gf", "rwr"),
    2: ("dsr", "gbr", "gf", "rwr"),
    3: ("gf", "rwr"),  # the attack targets HELLO neighbor discovery
    4: ("dsr", "gbr"),  # the attack targets route-establishment floods
}

RAW_HEADER = (
    "scenario,protocol,k,trial,seed,delivery_ratio,avg_path_length,avg_degree,"
    "generated,delivered,dropped_malicious,dropped_ttl,dropped_phantom,"
    "dropped_no_route"
)
AGGREGATE_HEADER = "scenario,protocol,k,metric,mean,ci95,trials"

METRIC_NAMES = ("delivery_ratio", "avg_path_length", "avg_degree")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    """One sweep's worth of parameters (defaults mirror the study's table)."""

    scenario: int = 1
    protocols: tuple[str, ...] = ("all",)
    # None resolves per scenario: 10%..50% of node_count for 1-3, 1..5 for 4
    k_values: tuple[int, ...] | None = None
    node_count: int = 300
    side: float = 100.0
    radio_range: float = 20.0
    sim_time: float = 100.0
    lam: float = 1.0  # config-file key: lambda
    ttl: int = 32
    trials: int = 100
    hello_period: float = 3.0
    purge_period: float = 7.5
    delta_hop: float = 0.001
    p_f: float = 0.0
    master_seed: int = 42
    # None resolves per scenario: attackers source DATA except in scenario 4
    malicious_generate_data: bool | None = None


@dataclass
class TrialRow:
    """One raw CSV row, in column order."""

    scenario: int
    protocol: str
    k: int
    trial: int
    seed: int
    delivery_ratio: float
    avg_path_length: float | None
    avg_degree: float | None
    generated: int
    delivered: int
    dropped_malicious: int
    dropped_ttl: int
    dropped_phantom: int
    dropped_no_route: int


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from any mix of ints and strings."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def default_k_values(scenario: int, node_count: int) -> tuple[int, ...]:
    """The study's grids: 10%..50% of the population, or counts 1..5.

    Scenario 2 draws from the sinkhole region only, which holds about a
    quarter of the sensors, so its grid stops at 15% to keep every trial's
    placement feasible.
    """
    if scenario == 4:
        return (1, 2, 3, 4, 5)
    pcts = (5, 10, 15) if scenario == 2 else (10, 20, 30, 40, 50)
    return tuple(int(round(node_count * pct / 100.0)) for pct in pcts)


def validate_config(cfg: RunConfig) -> RunConfig:
    """Check invariants, resolve 'all' protocols and the per-scenario flag."""
    if cfg.scenario not in SCENARIO_PROTOCOLS:
        raise ConfigError(f"scenario must be one of 1-4, got {cfg.scenario}")
    allowed = SCENARIO_PROTOCOLS[cfg.scenario]
    protos = cfg.protocols
    if isinstance(protos, str):
        protos = (protos,)
    if len(protos) == 1 and protos[0] == "all":
        protos = allowed
    protos = tuple(p.lower() for p in protos)
    for p in protos:
        if p not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {p!r}")
        if p not in allowed:
            raise ConfigError(
                f"scenario {cfg.scenario} is incompatible with {p}: it targets "
                f"{'HELLO neighbor discovery' if cfg.scenario == 3 else 'route-establishment floods'}; "
                f"valid protocols: {', '.join(allowed)}"
            )
    if not protos:
        raise ConfigError("no protocols configured")
    if cfg.k_values is None:
        ks = default_k_values(cfg.scenario, cfg.node_count)
    elif not cfg.k_values:
        raise ConfigError("no k values configured")
    else:
        ks = tuple(sorted(set(int(k) for k in cfg.k_values)))
    for k in ks:
        if k < 0:
            raise ConfigError(f"k must be >= 0, got {k}")
        if k >= cfg.node_count:
            raise ConfigError(f"k={k} must be below node_count={cfg.node_count}")
    if cfg.node_count < 2:
        raise ConfigError("node_count must be at least 2")
    for name in ("side", "radio_range", "sim_time", "lam", "hello_period", "purge_period", "delta_hop"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be positive")
    if cfg.ttl < 1:
        raise ConfigError("ttl must be at least 1")
    if cfg.trials < 1:
        raise ConfigError("trials must be at least 1")
    if not 0.0 <= cfg.p_f <= 1.0:
        raise ConfigError("p_f must be in [0, 1]")
    mgd = cfg.malicious_generate_data
    if mgd is None:
        mgd = cfg.scenario != 4
    return replace(cfg, protocols=protos, k_values=ks, malicious_generate_data=mgd)


# per-trial stream builders


def _sample_topology(cfg: RunConfig, trial: int) -> Topology:
    rng = np.random.default_rng(derive_seed(cfg.master_seed, trial, "topology"))
    return sample_until_connected(
        cfg.node_count,
        cfg.side,
        cfg.radio_range,
        rng,
        require_greedy_routable=True,
    )


def _draw_traffic(cfg: RunConfig, trial: int) -> list[list[float]]:
    """Poisson arrival times per node over [0, sim_time), node-major.

    Drawn for every sensor regardless of who ends up generating, so the
    offered workload is invariant across scenarios and k.
    """
    rnd = random.Random(derive_seed(cfg.master_seed, trial, "traffic"))
    sim_time = cfg.sim_time
    lam = cfg.lam
    times: list[list[float]] = [[] for _ in range(cfg.node_count)]
    for node in range(cfg.node_count):
        if node == 0:  # the sink generates nothing
            continue
        out = times[node]
        t = poisson_next_interarrival(rnd, lam)
        while t < sim_time:
            out.append(t)
            t += poisson_next_interarrival(rnd, lam)
    return times


def _draw_hello_phases(cfg: RunConfig, trial: int) -> list[float]:
    rnd = random.Random(derive_seed(cfg.master_seed, trial, "hello"))
    return [rnd.uniform(0.0, cfg.hello_period) for _ in range(cfg.node_count)]


def _place(cfg: RunConfig, topo: Topology, k: int, trial: int) -> CompromisedSet:
    if k == 0:
        return CompromisedSet(frozenset())
    rnd = random.Random(
        derive_seed(cfg.master_seed, trial, "placement", cfg.scenario, k)
    )
    if SCENARIO_PLACEMENTS[cfg.scenario] == "sinkhole":
        return place_sinkhole(topo, k, rnd)
    return place_uniform(topo, k, rnd)


def _execute(
    cfg: RunConfig,
    protocol: str,
    k: int,
    trial: int,
    topo: Topology,
    traffic_times: list[list[float]],
    hello_phase: list[float] | None,
    trace=None,
) -> RunMetrics:
    behavior = behavior_for(cfg.scenario, protocol)
    try:
        compromised = _place(cfg, topo, k, trial)
    except PlacementError as e:
        raise PlacementError(
            f"{e} (scenario={cfg.scenario}, protocol={protocol}, k={k}, trial={trial})"
        ) from e
    adv = Adversary(
        topo,
        AdversaryConfig(
            placement=SCENARIO_PLACEMENTS[cfg.scenario],
            k=k,
            behavior=behavior,
            p_f=cfg.p_f,
        ),
        compromised,
        attack_rnd=random.Random(
            derive_seed(cfg.master_seed, trial, "attack", cfg.scenario, k)
        ),
        sybil_rnd=random.Random(derive_seed(cfg.master_seed, trial, "sybil", k))
        if behavior == SYBIL_HELLO
        else None,
        malicious_generate_data=cfg.malicious_generate_data,
    )
    metrics = RunMetrics(cfg.node_count)
    engine = Engine(topo, cfg.delta_hop, metrics, trace=trace)
    ctx = RunContext(
        topo=topo,
        metrics=metrics,
        adversary=adv,
        ttl=cfg.ttl,
        hello_period=cfg.hello_period,
        purge_period=cfg.purge_period,
        sim_time=cfg.sim_time,
        traffic_times=traffic_times,
        hello_phase=hello_phase,
        choices_rnd=random.Random(
            derive_seed(cfg.master_seed, trial, "choices", protocol)
        ),
    )
    proto = PROTOCOLS[protocol](engine, ctx)
    proto.start()
    engine.run()
    proto.finalize()
    if not proto.uses_hello:
        # no HELLO machinery: the degree metric is the static physical degree
        metrics.degree_samples.extend(len(nbs) for nbs in topo.adjacency)
    if metrics.in_flight() != 0:
        raise RuntimeError(
            f"packet accounting broken: {metrics.in_flight()} unaccounted "
            f"(scenario={cfg.scenario}, protocol={protocol}, k={k}, trial={trial})"
        )
    return metrics


def run_single(
    cfg: RunConfig, k: int, trial_index: int, protocol: str | None = None, trace=None
) -> RunMetrics:
    """One trial, fully derived from (master_seed, scenario, protocol, k, trial)."""
    cfg = validate_config(cfg)
    if protocol is None:
        if len(cfg.protocols) != 1:
            raise ConfigError(
                "run_single needs an explicit protocol when several are configured"
            )
        protocol = cfg.protocols[0]
    protocol = protocol.lower()
    if protocol not in SCENARIO_PROTOCOLS[cfg.scenario]:
        raise ConfigError(
            f"scenario {cfg.scenario} is incompatible with {protocol}"
        )
    topo = _sample_topology(cfg, trial_index)
    traffic = _draw_traffic(cfg, trial_index)
    phases = (
        _draw_hello_phases(cfg, trial_index)
        if protocol in HELLO_PROTOCOLS
        else None
    )
    return _execute(cfg, protocol, k, trial_index, topo, traffic, phases, trace)


def run_trials(cfg: RunConfig, trace=None, topology_sink=None) -> list[TrialRow]:
    """All (protocol, k, trial) cells of the sweep, as raw CSV rows.

    Trial-major execution so each trial's topology and workload are built
    once; rows come back sorted by (scenario, protocol, k, trial).
    """
    cfg = validate_config(cfg)
    rows: list[TrialRow] = []
    protos = sorted(cfg.protocols)
    need_phases = any(p in HELLO_PROTOCOLS for p in protos)
    for trial in range(cfg.trials):
        topo = _sample_topology(cfg, trial)
        if topology_sink is not None:
            topology_sink(trial, topo)
        traffic = _draw_traffic(cfg, trial)
        phases = _draw_hello_phases(cfg, trial) if need_phases else None
        for protocol in protos:
            p_phases = phases if protocol in HELLO_PROTOCOLS else None
            for k in cfg.k_values:
                m = _execute(cfg, protocol, k, trial, topo, traffic, p_phases, trace)
                rows.append(
                    TrialRow(
                        scenario=cfg.scenario,
                        protocol=protocol,
                        k=k,
                        trial=trial,
                        seed=derive_seed(
                            cfg.master_seed, cfg.scenario, protocol, k, trial
                        ),
                        delivery_ratio=delivery_ratio(m),
                        avg_path_length=average_path_length(m),
                        avg_degree=average_degree(m),
                        generated=m.generated_total,
                        delivered=len(m.delivered),
                        dropped_malicious=m.dropped_malicious,
                        dropped_ttl=m.dropped_ttl,
                        dropped_phantom=m.dropped_phantom,
                        dropped_no_route=m.dropped_no_route,
                    )
                )
    rows.sort(key=lambda r: (r.scenario, r.protocol, r.k, r.trial))
    return rows


def aggregate_trials(rows: list[TrialRow]) -> list[AggregateRow]:
    cells: dict[tuple[int, str, int], list[TrialRow]] = {}
    for r in rows:
        cells.setdefault((r.scenario, r.protocol, r.k), []).append(r)
    out: list[AggregateRow] = []
    for (scenario, protocol, k) in sorted(cells):
        group = cells[(scenario, protocol, k)]
        for metric in METRIC_NAMES:
            values = [
                v for r in group if (v := getattr(r, metric)) is not None
            ]
            if values:
                mean, half = aggregate(values)
            else:
                mean, half = None, None
            out.append(
                AggregateRow(
                    scenario=scenario,
                    protocol=protocol,
                    k=k,
                    metric=metric,
                    mean=mean,
                    ci95=half,
                    trials=len(values),
                )
            )
    return out


def run_sweep(cfg: RunConfig) -> list[AggregateRow]:
    """Run every cell and fold the trials into aggregate rows."""
    return aggregate_trials(run_trials(cfg))


def _cell(value) -> str:
    return "" if value is None else str(value)


def write_raw_csv(rows: list[TrialRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(RAW_HEADER + "\n")
        for r in rows:
            f.write(
                f"{r.scenario},{r.protocol},{r.k},{r.trial},{r.seed},"
                f"{_cell(r.delivery_ratio)},{_cell(r.avg_path_length)},"
                f"{_cell(r.avg_degree)},{r.generated},{r.delivered},"
                f"{r.dropped_malicious},{r.dropped_ttl},{r.dropped_phantom},"
                f"{r.dropped_no_route}\n"
            )


def write_aggregate_csv(rows: list[AggregateRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(AGGREGATE_HEADER + "\n")
        for r in rows:
            f.write(
                f"{r.scenario},{r.protocol},{r.k},{r.metric},"
                f"{_cell(r.mean)},{_cell(r.ci95)},{r.trials}\n"
            )


# flat key = value configuration files

_CONFIG_KEYS = {
    "scenario": int,
    "node_count": int,
    "side": float,
    "radio_range": float,
    "sim_time": float,
    "lambda": float,  # maps onto RunConfig.lam
    "ttl": int,
    "trials": int,
    "hello_period": float,
    "purge_period": float,
    "delta_hop": float,
    "p_f": float,
    "master_seed": int,
}


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config_file(path) -> dict:
    """Flat `key = value` lines; # starts a comment; keys match RunConfig."""
    out: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key = key.strip()
        value = value.strip()
        try:
            if key in _CONFIG_KEYS:
                out["lam" if key == "lambda" else key] = _CONFIG_KEYS[key](value)
            elif key in ("protocol", "protocols"):
                out["protocols"] = tuple(
                    p.strip().lower() for p in value.split(",") if p.strip()
                )
            elif key == "k_values":
                out["k_values"] = tuple(
                    int(v.strip()) for v in value.split(",") if v.strip()
                )
            elif key == "malicious_generate_data":
                out["malicious_generate_data"] = _parse_bool(value)
            else:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {e}") from e
    return out
