"""Chart generation for simulator sweep aggregates, fed purely by CSV."""

from .figures import (
    AggRow,
    FigureSpec,
    SchemaError,
    figure_specs,
    load_rows,
    plot_sweep,
    render,
    write_figures,
)

__all__ = [
    "AggRow",
    "FigureSpec",
    "SchemaError",
    "figure_specs",
    "load_rows",
    "plot_sweep",
    "render",
    "write_figures",
]
