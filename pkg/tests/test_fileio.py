"""CSV/JSON artifact plumbing: full-precision round trips and tolerant readers."""

import json
import math

import numpy as np
import pytest

from corrsearch.fileio import (
    TRACE_COLUMNS,
    read_angles_csv,
    read_data_csv,
    read_matrix_csv,
    write_angles_csv,
    write_matrix_csv,
    write_rows_csv,
    write_summary_json,
    write_support_csv,
    write_trace_csv,
)


def test_matrix_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(1)
    M = rng.standard_normal((7, 4)) * 10.0 ** rng.integers(-8, 8, size=(7, 4))
    p = tmp_path / "m.csv"
    write_matrix_csv(p, M)
    np.testing.assert_array_equal(read_matrix_csv(p), M)


def test_matrix_reader_skips_header_and_comments(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("# produced by hand\na,b\n1,2\n# middle note\n3,4\n\n")
    np.testing.assert_array_equal(read_matrix_csv(p), [[1.0, 2.0], [3.0, 4.0]])


def test_matrix_reader_headerless_numeric_first_row(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("1.5,2.5\n3.5,4.5\n")
    np.testing.assert_array_equal(read_matrix_csv(p), [[1.5, 2.5], [3.5, 4.5]])


@pytest.mark.parametrize(
    "content,fragment",
    [
        ("", "no numeric rows"),
        ("# only a comment\n", "no numeric rows"),
        ("1,2\n3\n", "inconsistent lengths"),
        ("1,2\n3,oops\n", "non-numeric"),
    ],
)
def test_matrix_reader_errors_name_the_file(tmp_path, content, fragment):
    p = tmp_path / "bad.csv"
    p.write_text(content)
    with pytest.raises(ValueError, match=fragment) as info:
        read_matrix_csv(p)
    assert "bad.csv" in str(info.value)


def test_write_matrix_rejects_non_2d(tmp_path):
    with pytest.raises(ValueError):
        write_matrix_csv(tmp_path / "x.csv", np.arange(4.0))


# ---------------------------------------------------------------------------
# angle vectors


def test_angles_round_trip_with_dimension(tmp_path):
    omega = np.array([0.25, 1.0, math.pi / 3])  # d = 3
    p = tmp_path / "a.csv"
    write_angles_csv(p, omega, 3)
    back, d = read_angles_csv(p)
    assert d == 3
    np.testing.assert_array_equal(back, omega)
    assert p.read_text().startswith("# d=3\n")


def test_angles_dimension_inferred_without_comment(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0.1,0.2,0.3,0.4,0.5,0.6\n")  # 6 angles -> d = 4
    back, d = read_angles_csv(p)
    assert d == 4
    assert back.size == 6


def test_angles_header_dimension_mismatch(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("# d=5\n0.1,0.2,0.3\n")
    with pytest.raises(ValueError, match="imply d=3"):
        read_angles_csv(p)


def test_angles_multiple_rows_rejected(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0.1,0.2,0.3\n0.4,0.5,0.6\n")
    with pytest.raises(ValueError, match="single row"):
        read_angles_csv(p)


def test_write_angles_length_check(tmp_path):
    with pytest.raises(ValueError):
        write_angles_csv(tmp_path / "a.csv", np.zeros(4), 3)  # d=3 needs 3


# ---------------------------------------------------------------------------
# data tables


def test_data_reader_header_and_dropped_rows(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text(
        "x1,x2,x3\n"
        "1,2,3\n"
        "4,,6\n"          # missing field
        "7,8,9\n"
        "10,nan,12\n"     # non-finite
        "13,bad,15\n"     # unparsable
    )
    X, names, dropped = read_data_csv(p)
    assert names == ["x1", "x2", "x3"]
    assert dropped == 3
    np.testing.assert_array_equal(X, [[1, 2, 3], [7, 8, 9]])


def test_data_reader_headerless(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,2\n3,4\n")
    X, names, dropped = read_data_csv(p)
    assert names is None and dropped == 0
    assert X.shape == (2, 2)


def test_data_reader_all_rows_bad(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b\nx,y\n")
    with pytest.raises(ValueError, match="no complete numeric rows"):
        read_data_csv(p)


def test_data_reader_header_width_mismatch(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,c\n1,2\n")
    with pytest.raises(ValueError, match="header has 3"):
        read_data_csv(p)


# ---------------------------------------------------------------------------
# support, trace, summary, generic rows


def test_support_written_as_integers(tmp_path):
    S = np.array([[0, 1], [1, 0]], dtype=np.int64)
    p = tmp_path / "s.csv"
    write_support_csv(p, S)
    assert p.read_text() == "0,1\n1,0\n"
    np.testing.assert_array_equal(read_matrix_csv(p), S)


def test_trace_round_trip(tmp_path):
    trace = [(1, 1, 1.0, 5.25, 7), (1, 2, 0.5, 1.0 / 3.0, 14)]
    p = tmp_path / "t.csv"
    write_trace_csv(p, trace)
    lines = p.read_text().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    M = read_matrix_csv(p)  # header sniffed away
    assert M.shape == (2, 5)
    assert M[1, 3] == 1.0 / 3.0  # full precision survived


def test_summary_json_handles_numpy_types(tmp_path):
    p = tmp_path / "s.json"
    write_summary_json(
        p,
        {
            "count": np.int64(3),
            "value": np.float64(0.5),
            "flag": np.bool_(True),
            "vec": np.array([1.0, 2.0]),
            "plain": "text",
        },
    )
    loaded = json.loads(p.read_text())
    assert loaded == {
        "count": 3,
        "value": 0.5,
        "flag": True,
        "vec": [1.0, 2.0],
        "plain": "text",
    }
    assert p.read_text().endswith("\n")


def test_summary_json_rejects_unknown_types(tmp_path):
    with pytest.raises(TypeError):
        write_summary_json(tmp_path / "s.json", {"bad": object()})


def test_rows_csv_column_order_and_precision(tmp_path):
    rows = [
        {"name": "a", "value": 1.0 / 3.0, "extra": "ignored"},
        {"name": "b"},  # missing value -> blank cell
    ]
    p = tmp_path / "r.csv"
    write_rows_csv(p, ["name", "value"], rows)
    lines = p.read_text().splitlines()
    assert lines[0] == "name,value"
    assert lines[1] == "a,%.17g" % (1.0 / 3.0)
    assert lines[2] == "b,"
