import warnings
from pathlib import Path

import pytest

from wsnplots import (
    SchemaError,
    figure_specs,
    load_rows,
    plot_sweep,
    render,
    write_figures,
)
from wsnplots.cli import main

GOLDEN = Path(__file__).parent / "data" / "golden_aggregate.csv"
METRICS = ("delivery_ratio", "avg_path_length", "avg_degree")


def test_load_rows_golden():
    rows = load_rows(GOLDEN)
    assert len(rows) == 75
    first = rows[0]
    assert (first.scenario, first.protocol, first.k) == (1, "dsr", 30)
    assert first.metric == "delivery_ratio"
    assert first.mean == 0.829 and first.ci95 == 0.018 and first.trials == 12
    # Empty cells parse to None.
    sparse = [r for r in rows if r.scenario == 1 and r.protocol == "rwr" and r.k == 60]
    path = next(r for r in sparse if r.metric == "avg_path_length")
    assert path.mean == 4.1 and path.ci95 is None and path.trials == 1
    hole = next(
        r
        for r in rows
        if (r.scenario, r.protocol, r.k, r.metric) == (2, "rwr", 45, "avg_path_length")
    )
    assert hole.mean is None and hole.ci95 is None and hole.trials == 0


def test_load_rows_rejects_bad_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("scenario,protocol,k,metric,mean,stderr,trials\n")
    with pytest.raises(SchemaError, match="bad header"):
        load_rows(bad)


def test_load_rows_rejects_bad_cells(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(
        "scenario,protocol,k,metric,mean,ci95,trials\n"
        "1,gf,30,delivery_ratio,0.9,0.01,12\n"
        "1,gf,x,delivery_ratio,0.9,0.01,12\n"
    )
    with pytest.raises(SchemaError, match="line 3"):
        load_rows(bad)
    bad.write_text(
        "scenario,protocol,k,metric,mean,ci95,trials\n1,gf,30,latency,0.9,0.01,12\n"
    )
    with pytest.raises(SchemaError, match="unknown metric"):
        load_rows(bad)
    bad.write_text(
        "scenario,protocol,k,metric,mean,ci95,trials\n1,gf,30,delivery_ratio,0.9,0.01\n"
    )
    with pytest.raises(SchemaError, match="6 columns"):
        load_rows(bad)


def test_figure_specs_counts_and_axes():
    specs = figure_specs(load_rows(GOLDEN))
    by_name = {s.name: s for s in specs}
    assert len(specs) == 15
    for scenario, count in ((1, 4), (2, 4), (3, 2)):
        for metric in METRICS:
            spec = by_name[f"scenario{scenario}_{metric}"]
            assert len(spec.series) == count
            assert spec.xlabel == "compromised nodes (% of population)"
    for proto in ("dsr", "gbr"):
        for metric in METRICS:
            spec = by_name[f"scenario4_{proto}_{metric}"]
            assert list(spec.series) == [proto.upper()]
            assert spec.xlabel == "compromised nodes (k)"
    # k converts to percent of the population on percent axes only.
    assert by_name["scenario1_delivery_ratio"].series["DSR"][0] == [10.0, 20.0]
    assert by_name["scenario4_dsr_delivery_ratio"].series["DSR"][0] == [1.0, 2.0]


def test_figure_specs_skip_empty_points():
    specs = figure_specs(load_rows(GOLDEN))
    by_name = {s.name: s for s in specs}
    # The k=45 cell has no path mean, so that point vanishes from the path
    # series but stays in the delivery series.
    assert by_name["scenario2_avg_path_length"].series["RWR"][0] == [5.0, 10.0]
    assert by_name["scenario2_delivery_ratio"].series["RWR"][0] == [5.0, 10.0, 15.0]


def test_single_cell_single_point(tmp_path):
    csv = tmp_path / "one.csv"
    csv.write_text(
        "scenario,protocol,k,metric,mean,ci95,trials\n"
        "1,gf,30,delivery_ratio,0.857,0.014,12\n"
    )
    specs = figure_specs(load_rows(csv))
    assert len(specs) == 1
    (xs, ys, cis) = specs[0].series["GF"]
    assert xs == [10.0] and ys == [0.857] and cis == [0.014]
    fig = render(specs[0])
    assert fig.axes


def test_write_figures_file_set(tmp_path):
    written = plot_sweep(GOLDEN, tmp_path / "figs")
    names = sorted(p.name for p in written)
    assert len(written) == 30
    expected = []
    for scenario, _metricless in ((1, 4), (2, 4), (3, 2)):
        expected += [f"scenario{scenario}_{m}.{e}" for m in METRICS for e in ("png", "svg")]
    expected += [
        f"scenario4_{p}_{m}.{e}"
        for p in ("dsr", "gbr")
        for m in METRICS
        for e in ("png", "svg")
    ]
    assert names == sorted(expected)
    for p in written:
        assert p.stat().st_size > 0


def test_rendering_is_deterministic(tmp_path):
    a = plot_sweep(GOLDEN, tmp_path / "a")
    b = plot_sweep(GOLDEN, tmp_path / "b")
    for pa, pb in zip(sorted(a), sorted(b)):
        assert pa.read_bytes() == pb.read_bytes(), pa.name


def test_empty_csv_warns_and_writes_nothing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("scenario,protocol,k,metric,mean,ci95,trials\n")
    out = tmp_path / "figs"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        written = plot_sweep(empty, out)
    assert written == []
    assert not out.exists()
    assert any("nothing to plot" in str(w.message) for w in caught)


def test_cli_happy_path(tmp_path, capsys):
    out = tmp_path / "figs"
    assert main([str(GOLDEN), "--out", str(out)]) == 0
    assert "wrote 30 files" in capsys.readouterr().out
    assert (out / "scenario3_avg_degree.svg").exists()


def test_cli_error_paths(tmp_path, capsys):
    assert main([str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,valid,header\n")
    assert main([str(bad), "--out", str(tmp_path)]) == 1
    assert "wsnplot:" in capsys.readouterr().err
    empty = tmp_path / "empty.csv"
    empty.write_text("scenario,protocol,k,metric,mean,ci95,trials\n")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert main([str(empty), "--out", str(tmp_path / "f")]) == 0
