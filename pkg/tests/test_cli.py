import json

import pytest

from ntoslab.cli import EXIT_INVALID, EXIT_OK, EXIT_USAGE, parse_grid, parse_n_range, run_cli, UsageError
from ntoslab.io import read_table

FIG = ["--t1", "2", "--t2", "1.5", "--gamma", "1", "--lambda-l", "1e-7", "--lambda-r", "1e-7"]


def test_parse_n_range():
    assert parse_n_range("5") == [5]
    assert parse_n_range("2:6") == [2, 3, 4, 5, 6]
    assert parse_n_range("20:60:20") == [20, 40, 60]
    for bad in ("a:b", "6:2", "2:10:0", "1:2:3:4"):
        with pytest.raises(UsageError):
            parse_n_range(bad)


def test_parse_grid():
    assert parse_grid("-4:4:161") == (-4.0, 4.0, 161)
    with pytest.raises(UsageError):
        parse_grid("-4:4")


def test_nsweep_writes_table(tmp_path):
    out = tmp_path / "sweep.csv"
    assert run_cli(["nsweep", *FIG, "--n", "2:30", "--out", str(out)]) == EXIT_OK
    table = read_table(out)
    assert table.schema_id.startswith("ntoslab.nsweep")
    assert table.column("N") == list(range(2, 31))
    assert table.metadata["params"]["t1"] == 2.0


def test_spectrum_json(tmp_path):
    out = tmp_path / "spec.json"
    assert run_cli(["spectrum", *FIG, "--n", "6", "--out", str(out)]) == EXIT_OK
    table = read_table(out)
    assert len(table.rows) == 11
    assert sum(table.column("is_emin")) == 1


def test_phase_negative_grid_without_equals(tmp_path):
    out = tmp_path / "phase.csv"
    argv = ["phase", "--quantity", "winding,slope", "--gamma", "1", "--t1", "-2:2:9", "--t2", "-2:2:9", "--out", str(out)]
    assert run_cli(argv) == EXIT_OK
    assert (tmp_path / "phase_winding.csv").exists()
    assert (tmp_path / "phase_slope.csv").exists()


def test_saturation_and_curves(tmp_path):
    assert run_cli(["saturation", *FIG, "--out", str(tmp_path / "s.csv")]) == EXIT_OK
    row = read_table(tmp_path / "s.csv")
    assert len(row.rows) == 1
    assert run_cli(["curves", "--t1", "2.5", "--t2", "2.8", "--gamma", "1", "--kind", "GBZ",
                    "--samples", "64", "--out", str(tmp_path / "c.csv")]) == EXIT_OK
    assert len(read_table(tmp_path / "c.csv").rows) == 128


def test_config_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": "2:12"}))
    out = tmp_path / "sweep.csv"
    assert run_cli(["nsweep", *FIG, "--n", "2:30", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert read_table(out).column("N")[-1] == 12


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run_cli(["nsweep", *FIG, "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == EXIT_INVALID


@pytest.mark.parametrize(
    "argv,code",
    [
        (["frobnicate"], EXIT_USAGE),
        (["nsweep", "--t1", "2"], EXIT_USAGE),
        (["nsweep", "--t1", "1", "--t2", "2", "--gamma", "1"], EXIT_INVALID),
        (["nsweep", *FIG, "--n", "2:500"], EXIT_INVALID),
        (["validate", "--only", "x"], EXIT_USAGE),
    ],
)
def test_exit_codes(tmp_path, argv, code):
    assert run_cli(argv + ["--out", str(tmp_path / "o.csv")]) == code


def test_version(capsys):
    assert run_cli(["--version"]) == EXIT_OK
    assert "ntoslab" in capsys.readouterr().out


def test_validate_single_criterion(tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert run_cli(["validate", "--only", "3", "--out", str(out)]) == EXIT_OK
    assert "[PASS] 3." in capsys.readouterr().out
    assert read_table(out).column("status") == ["PASS"]
