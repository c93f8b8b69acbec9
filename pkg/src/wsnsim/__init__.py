"""Deterministic discrete-event study of WSN routing resilience.

Four routing protocols (DSR, GBR, GF, RWR) under four insider-adversary
scenarios, measured by delivery ratio, path length and observed node degree.
"""

from .experiment import (
    ConfigError,
    RunConfig,
    TrialRow,
    aggregate_trials,
    derive_seed,
    run_single,
    run_sweep,
    run_trials,
    validate_config,
)
from .metrics import (
    AggregateRow,
    RunMetrics,
    aggregate,
    average_degree,
    average_path_length,
    delivery_ratio,
    safe_route_probability,
)
from .topology import (
    Topology,
    TopologyError,
    average_physical_degree,
    generate_topology,
    is_connected,
    sample_until_connected,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateRow",
    "ConfigError",
    "RunConfig",
    "RunMetrics",
    "Topology",
    "TopologyError",
    "TrialRow",
    "aggregate",
    "aggregate_trials",
    "average_degree",
    "average_path_length",
    "average_physical_degree",
    "delivery_ratio",
    "derive_seed",
    "generate_topology",
    "is_connected",
    "run_single",
    "run_sweep",
    "run_trials",
    "safe_route_probability",
    "sample_until_connected",
    "validate_config",
]
