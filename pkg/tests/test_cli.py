import pytest

from wsnsim.cli import build_parser, main
from wsnsim.experiment import RAW_HEADER


def run_cli(args):
    return main(list(args))


def read_rows(path):
    lines = path.read_text().splitlines()
    return lines[0], [ln.split(",") for ln in lines[1:]]


def test_happy_path_writes_both_csvs(tmp_path):
    out = tmp_path / "res"
    rc = run_cli(
        ["--scenario", "4", "--protocols", "dsr", "--k-count", "1", "--trials", "1",
         "--seed", "3", "--out", str(out)]
    )
    assert rc == 0
    header, rows = read_rows(out / "raw.csv")
    assert header == RAW_HEADER
    assert len(rows) == 1
    assert rows[0][:4] == ["4", "dsr", "1", "0"]
    agg_header, agg_rows = read_rows(out / "aggregate.csv")
    assert agg_header == "scenario,protocol,k,metric,mean,ci95,trials"
    assert len(agg_rows) == 3


def test_k_percent_converts_to_counts(tmp_path):
    out = tmp_path / "res"
    rc = run_cli(
        ["--scenario", "1", "--protocols", "gbr", "--k-percent", "10", "--trials", "1",
         "--out", str(out), "--config", "/dev/null"]
    )
    assert rc == 0
    _, rows = read_rows(out / "raw.csv")
    assert {r[2] for r in rows} == {"30"}


def test_config_file_flags_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("scenario = 4\nprotocols = gbr\nk_values = 1\ntrials = 5\n")
    out = tmp_path / "res"
    rc = run_cli(["--config", str(cfg), "--trials", "2", "--out", str(out)])
    assert rc == 0
    _, rows = read_rows(out / "raw.csv")
    assert len(rows) == 2  # the flag beat the file's 5


def test_incompatible_pair_is_config_error(tmp_path):
    rc = run_cli(
        ["--scenario", "3", "--protocols", "dsr", "--trials", "1",
         "--out", str(tmp_path / "x")]
    )
    assert rc == 1


def test_bad_scenario_is_config_error(tmp_path):
    rc = run_cli(["--scenario", "9", "--trials", "1", "--out", str(tmp_path / "x")])
    assert rc == 1


def test_infeasible_sinkhole_k_is_config_error(tmp_path):
    rc = run_cli(
        ["--scenario", "2", "--protocols", "gf", "--k-count", "250", "--trials", "1",
         "--out", str(tmp_path / "x")]
    )
    assert rc == 1


def test_mutually_exclusive_k_flags_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run_cli(["--k-percent", "10", "--k-count", "3", "--out", str(tmp_path / "x")])
    assert exc.value.code == 1


def test_unwritable_out_is_runtime_error(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    rc = run_cli(
        ["--scenario", "4", "--protocols", "gbr", "--k-count", "1", "--trials", "1",
         "--out", str(blocker / "nested")]
    )
    assert rc == 2


def test_dump_topology_writes_trial_files(tmp_path):
    out = tmp_path / "res"
    rc = run_cli(
        ["--scenario", "4", "--protocols", "gbr", "--k-count", "1", "--trials", "2",
         "--out", str(out), "--dump-topology"]
    )
    assert rc == 0
    t0 = out / "topologies" / "trial000.csv"
    t1 = out / "topologies" / "trial001.csv"
    assert t0.exists() and t1.exists()
    assert t0.read_text().startswith("node_id,x,y,is_sink\n")


def test_trace_writes_event_lines(tmp_path):
    out = tmp_path / "res"
    trace = tmp_path / "trace.log"
    rc = run_cli(
        ["--scenario", "4", "--protocols", "gbr", "--k-count", "1", "--trials", "1",
         "--out", str(out), "--trace", str(trace)]
    )
    assert rc == 0
    body = trace.read_text()
    assert body
    assert "broadcast" in body or "unicast" in body


def test_boolean_optional_mgd_flag(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    base = ["--scenario", "1", "--protocols", "gbr", "--k-percent", "10",
            "--trials", "1"]
    assert run_cli(base + ["--out", str(out1), "--malicious-generate-data"]) == 0
    assert run_cli(base + ["--out", str(out2), "--no-malicious-generate-data"]) == 0
    gen1 = int(read_rows(out1 / "raw.csv")[1][0][8])
    gen2 = int(read_rows(out2 / "raw.csv")[1][0][8])
    # 30 of 299 sources silenced: noticeably less traffic
    assert gen2 < gen1 * 0.95


def test_parser_covers_spec_flags():
    p = build_parser()
    text = p.format_help()
    for flag in (
        "--scenario", "--protocols", "--k-percent", "--k-count", "--trials",
        "--seed", "--out", "--config", "--pf", "--malicious-generate-data",
        "--dump-topology", "--trace",
    ):
        assert flag in text
