import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.exceptions import DimensionError
from app.schemas.report import ResultRow, ResultTable
from app.services import export
from app.services.operators import Operator


def test_fmt():
    assert export.fmt(1.0) == "1"
    assert export.fmt(0.1) == "0.10000000000000001"
    assert export.fmt(3) == "3"
    assert export.fmt(True) == "true"
    assert export.fmt(None) == ""


def test_triplet_format(tmp_path):
    op = Operator(np.array([[0.0, 1.5], [2j, 0.0]]), name="demo")
    path = export.export_triplets(op, tmp_path / "op.txt")
    assert path.read_text() == "dim 2 2 2\n0 1 1.5 0\n1 0 0 2\n"
    back = export.load_triplets(path)
    assert_allclose(back.to_dense(), op.to_dense())
    assert back.name == "op"


def test_triplet_header_is_checked(tmp_path):
    path = tmp_path / "op.txt"
    path.write_text("dim 2 2 3\n0 0 1 0\n")
    with pytest.raises(DimensionError, match="announces 3"):
        export.load_triplets(path)


def test_state_files(tmp_path):
    vec = np.array([1.0, complex(0.0, -0.5), 0.25 + 0.75j])
    path = export.export_state(vec, tmp_path / "state.txt")
    assert path.read_text().splitlines()[1] == "1 0 -0.5"
    assert_allclose(export.load_state(path), vec)
    path.write_text("1 0 0\n0 1 0\n")
    with pytest.raises(DimensionError):
        export.load_state(path)


def test_csv_metadata_and_line_endings(tmp_path):
    path = export.write_csv(tmp_path / "t.csv", ["a", "b"], [[1, 0.5], [2, None]], {"config_hash": "abc"})
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode() == "# config_hash: abc\na,b\n1,0.5\n2,\n"
    assert [p.name for p in tmp_path.iterdir()] == ["t.csv"]


def test_result_table_columns(tmp_path):
    table = ResultTable(
        metadata={"config_hash": "h"},
        axes=["x", "y"],
        rows=[ResultRow(component="v1", coords=[0.0, 0.5], quantum=1.0, classical=1.0, abs_err=0.0, rel_err=0.0)],
    )
    lines = export.write_result_table(table, tmp_path / "results.csv").read_text().splitlines()
    assert lines[0] == "# config_hash: h"
    assert lines[1] == "component,x,y,quantum,classical,exact,abs_err,rel_err"
    assert lines[2] == "v1,0,0.5,1,1,,0,0"


def test_write_json_sorts_keys(tmp_path):
    path = export.write_json(tmp_path / "out.json", {"b": 1, "a": [1, 2]})
    assert path.read_text().startswith('{\n  "a"')
