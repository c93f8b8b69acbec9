"""Command-line front end: run a sweep, write the two CSVs.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .adversary import PlacementError
from .experiment import (
    ConfigError,
    RunConfig,
    aggregate_trials,
    parse_config_file,
    run_trials,
    validate_config,
    write_aggregate_csv,
    write_raw_csv,
)
from .topology import dump_topology


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; here that is a configuration error."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="wsnsim",
        description=(
            "Deterministic discrete-event study of WSN routing resilience "
            "under insider attacks (DSR, GBR, GF, RWR)."
        ),
    )
    p.add_argument("--scenario", type=int, help="attack scenario, 1-4")
    p.add_argument(
        "--protocols",
        help="comma-separated protocols (dsr,gbr,gf,rwr) or 'all' "
        "(all protocols compatible with the scenario)",
    )
    k = p.add_mutually_exclusive_group()
    k.add_argument(
        "--k-percent",
        help="comma-separated compromised-node percentages of node_count",
    )
    k.add_argument("--k-count", help="comma-separated compromised-node counts")
    p.add_argument("--trials", type=int, help="trials per (protocol, k) cell")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", default="results", help="output directory (default: results)")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--pf", type=float, help="selective-forwarding pass probability p_f")
    p.add_argument(
        "--malicious-generate-data",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="whether compromised nodes source their own DATA "
        "(default: yes except scenario 4)",
    )
    p.add_argument(
        "--dump-topology",
        action="store_true",
        help="write each trial's sampled topology under <out>/topologies/",
    )
    p.add_argument(
        "--trace",
        metavar="PATH",
        help="write the full event trace to PATH (intended for tiny runs)",
    )
    return p


def _parse_int_list(text: str, what: str) -> tuple[int, ...]:
    try:
        return tuple(int(v.strip()) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ConfigError(f"bad {what} list {text!r}: {e}") from e


def _parse_float_list(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(v.strip()) for v in text.split(",") if v.strip())
    except ValueError as e:
        raise ConfigError(f"bad {what} list {text!r}: {e}") from e


def config_from_args(args: argparse.Namespace) -> RunConfig:
    fields: dict = {}
    if args.config:
        fields.update(parse_config_file(args.config))
    if args.scenario is not None:
        fields["scenario"] = args.scenario
    if args.protocols is not None:
        fields["protocols"] = tuple(
            p.strip().lower() for p in args.protocols.split(",") if p.strip()
        )
    if args.trials is not None:
        fields["trials"] = args.trials
    if args.seed is not None:
        fields["master_seed"] = args.seed
    if args.pf is not None:
        fields["p_f"] = args.pf
    if args.malicious_generate_data is not None:
        fields["malicious_generate_data"] = args.malicious_generate_data
    cfg = RunConfig(**fields)
    if args.k_count is not None:
        cfg = _with_k(cfg, _parse_int_list(args.k_count, "--k-count"))
    elif args.k_percent is not None:
        pcts = _parse_float_list(args.k_percent, "--k-percent")
        cfg = _with_k(
            cfg,
            tuple(int(round(cfg.node_count * pct / 100.0)) for pct in pcts),
        )
    return cfg


def _with_k(cfg: RunConfig, ks: tuple[int, ...]) -> RunConfig:
    from dataclasses import replace

    return replace(cfg, k_values=ks)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = validate_config(config_from_args(args))
    except ConfigError as e:
        print(f"wsnsim: configuration error: {e}", file=sys.stderr)
        return 1

    out_dir = args.out
    trace_file = None
    try:
        os.makedirs(out_dir, exist_ok=True)
        topology_sink = None
        if args.dump_topology:
            topo_dir = os.path.join(out_dir, "topologies")
            os.makedirs(topo_dir, exist_ok=True)

            def topology_sink(trial, topo):
                dump_topology(topo, os.path.join(topo_dir, f"trial{trial:03d}.csv"))

        trace = None
        if args.trace:
            trace_file = open(args.trace, "w", encoding="utf-8")

            def trace(line):
                trace_file.write(line + "\n")

        rows = run_trials(cfg, trace=trace, topology_sink=topology_sink)
        raw_path = os.path.join(out_dir, "raw.csv")
        agg_path = os.path.join(out_dir, "aggregate.csv")
        write_raw_csv(rows, raw_path)
        write_aggregate_csv(aggregate_trials(rows), agg_path)
    except (ConfigError, PlacementError) as e:
        print(f"wsnsim: configuration error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - the CLI boundary reports and exits
        print(f"wsnsim: runtime error: {e}", file=sys.stderr)
        return 2
    finally:
        if trace_file is not None:
            trace_file.close()

    cells = len({(r.protocol, r.k) for r in rows})
    print(
        f"scenario {cfg.scenario}: {len(rows)} trials over {cells} cells -> "
        f"{raw_path}, {agg_path}"
    )
    return 0


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
