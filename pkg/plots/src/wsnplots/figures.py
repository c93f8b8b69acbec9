"""Figure generation from aggregate sweep CSVs.

The only interface to the simulator is the aggregate CSV file; nothing here
imports or invokes it. One figure per (scenario, metric) pair present in the
data, except scenario 4, which gets one figure per (protocol, metric) because
its protocols are swept over different attacks and belong on separate charts.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

EXPECTED_HEADER = "scenario,protocol,k,metric,mean,ci95,trials"
METRICS = ("delivery_ratio", "avg_path_length", "avg_degree")
YLABELS = {
    "delivery_ratio": "average delivery ratio",
    "avg_path_length": "average path length (hops)",
    "avg_degree": "average node degree",
}
# Scenario 4 sweeps single-digit counts; the others sweep fractions of the
# population, so their x axis reads as a percentage.
COUNT_AXIS_SCENARIOS = frozenset({4})
MARKERS = ("o", "s", "^", "d")

__all__ = [
    "AggRow",
    "FigureSpec",
    "SchemaError",
    "load_rows",
    "figure_specs",
    "render",
    "write_figures",
    "plot_sweep",
]


class SchemaError(Exception):
    """The CSV does not conform to the aggregate schema."""


@dataclass(frozen=True)
class AggRow:
    scenario: int
    protocol: str
    k: int
    metric: str
    mean: float | None
    ci95: float | None
    trials: int


@dataclass(frozen=True)
class FigureSpec:
    """One chart: series maps a label to (xs, means, ci halfwidths)."""

    name: str
    title: str
    xlabel: str
    ylabel: str
    series: dict[str, tuple[list[float], list[float], list[float | None]]]


def _opt_float(cell: str, what: str, lineno: int) -> float | None:
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError:
        raise SchemaError(f"line {lineno}: bad {what} value {cell!r}") from None


def load_rows(path: str | Path) -> list[AggRow]:
    """Parse an aggregate CSV; raise SchemaError on any deviation."""
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file, expected a header line") from None
        if ",".join(header) != EXPECTED_HEADER:
            raise SchemaError(
                f"bad header {','.join(header)!r}, expected {EXPECTED_HEADER!r}"
            )
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != 7:
                raise SchemaError(f"line {lineno}: {len(cells)} columns, expected 7")
            scenario, protocol, k, metric, mean, ci95, trials = cells
            if metric not in METRICS:
                raise SchemaError(f"line {lineno}: unknown metric {metric!r}")
            if not protocol:
                raise SchemaError(f"line {lineno}: empty protocol")
            try:
                scenario_i, k_i, trials_i = int(scenario), int(k), int(trials)
            except ValueError:
                raise SchemaError(
                    f"line {lineno}: scenario, k and trials must be integers"
                ) from None
            rows.append(
                AggRow(
                    scenario_i,
                    protocol,
                    k_i,
                    metric,
                    _opt_float(mean, "mean", lineno),
                    _opt_float(ci95, "ci95", lineno),
                    trials_i,
                )
            )
    return rows


def _series(
    rows: list[AggRow], node_count: int, percent: bool
) -> dict[str, tuple[list[float], list[float], list[float | None]]]:
    out: dict[str, tuple[list[float], list[float], list[float | None]]] = {}
    for proto in sorted({r.protocol for r in rows}):
        pts = sorted(
            (r for r in rows if r.protocol == proto and r.mean is not None),
            key=lambda r: r.k,
        )
        if not pts:
            continue
        xs = [100.0 * r.k / node_count if percent else float(r.k) for r in pts]
        out[proto.upper()] = (xs, [r.mean for r in pts], [r.ci95 for r in pts])
    return out


def figure_specs(rows: list[AggRow], node_count: int = 300) -> list[FigureSpec]:
    """Group rows into chart specs; only cells present in the CSV appear."""
    specs = []
    for scenario in sorted({r.scenario for r in rows}):
        percent = scenario not in COUNT_AXIS_SCENARIOS
        xlabel = (
            "compromised nodes (% of population)" if percent else "compromised nodes (k)"
        )
        srows = [r for r in rows if r.scenario == scenario]
        for metric in METRICS:
            mrows = [r for r in srows if r.metric == metric]
            if scenario in COUNT_AXIS_SCENARIOS:
                for proto in sorted({r.protocol for r in mrows}):
                    series = _series(
                        [r for r in mrows if r.protocol == proto], node_count, percent
                    )
                    if series:
                        specs.append(
                            FigureSpec(
                                name=f"scenario{scenario}_{proto}_{metric}",
                                title=f"Scenario {scenario}, {proto.upper()}: {YLABELS[metric]}",
                                xlabel=xlabel,
                                ylabel=YLABELS[metric],
                                series=series,
                            )
                        )
            else:
                series = _series(mrows, node_count, percent)
                if series:
                    specs.append(
                        FigureSpec(
                            name=f"scenario{scenario}_{metric}",
                            title=f"Scenario {scenario}: {YLABELS[metric]}",
                            xlabel=xlabel,
                            ylabel=YLABELS[metric],
                            series=series,
                        )
                    )
    return specs


def render(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, (label, (xs, ys, cis)) in enumerate(spec.series.items()):
        ax.errorbar(
            xs,
            ys,
            yerr=[c if c is not None else 0.0 for c in cis],
            marker=MARKERS[i % len(MARKERS)],
            capsize=3,
            label=label,
        )
    ax.set_xlabel(spec.xlabel)
    ax.set_ylabel(spec.ylabel)
    ax.set_title(spec.title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def write_figures(
    specs: list[FigureSpec], out_dir: str | Path, formats: tuple[str, ...] = ("svg", "png")
) -> list[Path]:
    """Render every spec into out_dir; returns the written paths.

    SVG ids are salted with a fixed string and the date metadata is dropped
    so identical input yields byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    with plt.rc_context({"svg.hashsalt": "wsnplots"}):
        for spec in specs:
            fig = render(spec)
            for ext in formats:
                path = out / f"{spec.name}.{ext}"
                meta = {"Date": None} if ext == "svg" else None
                fig.savefig(path, metadata=meta)
                written.append(path)
            plt.close(fig)
    return written


def plot_sweep(
    aggregate_csv_path: str | Path, out_dir: str | Path, node_count: int = 300
) -> list[Path]:
    """Read one aggregate CSV and emit every chart it supports."""
    rows = load_rows(aggregate_csv_path)
    if not rows:
        warnings.warn(f"{aggregate_csv_path}: no data rows, nothing to plot")
        return []
    return write_figures(figure_specs(rows, node_count), out_dir)
