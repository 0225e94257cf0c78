import math

import pytest

from ntoslab.io import TableArtifact, fmt_float, read_table, to_csv_text, write_table


def _table():
    art = TableArtifact(
        "test.table/1",
        [("N", "int"), ("x", "float"), ("label", "str")],
        metadata={"params": {"t2": 2.8, "t1": 2.5}, "note": "a, b"},
    )
    art.add_row(2, 0.1, "first")
    art.add_row(3, -1.0 / 3.0, "has, comma")
    art.add_row(4, math.inf, "inf")
    return art


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(tmp_path, fmt):
    path = tmp_path / f"t.{fmt}"
    art = _table()
    write_table(art, fmt, path)
    back = read_table(path)
    assert back.schema_id == art.schema_id
    assert back.columns == art.columns
    assert back.metadata == art.metadata
    assert back.rows == art.rows


def test_floats_keep_every_bit():
    x = 0.1 + 0.2
    assert float(fmt_float(x)) == x
    assert fmt_float(math.nan) == "nan"
    assert fmt_float(-math.inf) == "-inf"


def test_csv_header_layout():
    lines = to_csv_text(_table()).splitlines()
    assert lines[0] == '# schema_id: "test.table/1"'
    meta_keys = [ln[2:].split(":")[0] for ln in lines[1:] if ln.startswith("# ")]
    assert meta_keys[:-1] == sorted(meta_keys[:-1])
    assert "N,x,label" in lines


def test_add_row_checks_width():
    with pytest.raises(ValueError):
        _table().add_row(1, 2.0)


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        write_table(_table(), "xml", tmp_path / "t.xml")
