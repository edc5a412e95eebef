from fractions import Fraction

import pytest

from hyperl4.errors import PointSetParseError
from hyperl4.utils.pointset_io import (
    read_integer_table,
    read_pointset,
    write_pointset,
    write_rows,
)
from hyperl4.weighted_set import WeightedSet, WeightMode


def test_exact_file_with_comments(write_csv):
    path = write_csv(
        "f.csv",
        ["# a comment", "x,y,z,w_re", "", "1,1,0,1", "2,2,0,1/2", "# trailing"],
    )
    f = read_pointset(path)
    assert f.mode == WeightMode.EXACT
    assert f.to_dict() == {(1, 1, 0): 1, (2, 2, 0): Fraction(1, 2)}


def test_decimal_weights_switch_to_numeric(write_csv):
    path = write_csv("f.csv", ["x,y,z,w_re", "0,0,0,0.5", "1,0,0,2"])
    f = read_pointset(path)
    assert f.mode == WeightMode.NUMERIC
    assert f.weight_at((0, 0, 0)) == pytest.approx(0.5)


def test_imaginary_column(write_csv):
    path = write_csv("f.csv", ["x,y,z,w_re,w_im", "0,0,0,1,2"])
    f = read_pointset(path)
    assert f.weight_at((0, 0, 0)) == pytest.approx(1 + 2j)
    with pytest.raises(PointSetParseError):
        read_pointset(path, WeightMode.EXACT)


def test_forced_numeric_mode(write_csv):
    path = write_csv("f.csv", ["x,y,z,w_re", "0,0,0,3"])
    assert read_pointset(path, WeightMode.NUMERIC).mode == WeightMode.NUMERIC


@pytest.mark.parametrize(
    "lines, line_no",
    [
        (["x,y,z,w_re", "0,0,0,1", "0,0,0,2"], 3),
        (["x,y,z,w_re", "0,0,1"], 2),
        (["x,y,z,w_re", "2000000,0,0,1"], 2),
        (["x,y,z,w_re", "a,0,0,1"], 2),
        (["x,y,w_re"], 1),
    ],
)
def test_parse_errors_carry_line_number(write_csv, lines, line_no):
    path = write_csv("bad.csv", lines)
    with pytest.raises(PointSetParseError) as exc:
        read_pointset(path)
    assert exc.value.line == line_no
    assert str(exc.value).startswith(f"{path}:{line_no}: ")


def test_exact_mode_rejects_decimal_and_zero_denominator(write_csv):
    decimal = write_csv("d.csv", ["x,y,z,w_re", "0,0,0,0.5"])
    with pytest.raises(PointSetParseError):
        read_pointset(decimal, WeightMode.EXACT)
    zero = write_csv("z.csv", ["x,y,z,w_re", "0,0,0,1/0"])
    with pytest.raises(PointSetParseError):
        read_pointset(zero)


def test_empty_file(write_csv):
    path = write_csv("e.csv", ["# nothing here"])
    with pytest.raises(PointSetParseError):
        read_pointset(path)


def test_header_only_gives_empty_set(write_csv):
    f = read_pointset(write_csv("h.csv", ["x,y,z,w_re"]))
    assert len(f) == 0


def test_write_then_read_preserves_exact_weights(tmp_path):
    f = WeightedSet(
        [(0, 0, 0), (-3, 2, 1)], [Fraction(2, 3), 5], WeightMode.EXACT
    )
    path = tmp_path / "out" / "f.csv"
    write_pointset(path, f)
    assert path.read_text().splitlines()[0] == "x,y,z,w_re"
    assert read_pointset(path) == f


def test_numeric_writer_emits_imaginary_column(tmp_path):
    f = WeightedSet([(0, 0, 0)], [1 - 1j], WeightMode.NUMERIC)
    path = tmp_path / "f.csv"
    write_pointset(path, f)
    assert path.read_text().splitlines() == ["x,y,z,w_re,w_im", "0,0,0,1.0,-1.0"]


def test_integer_table(write_csv):
    path = write_csv("lines.csv", ["A,B,C", "1,0,-2", "0,1,3"])
    assert read_integer_table(path, ("A", "B", "C")) == [(1, 0, -2), (0, 1, 3)]
    with pytest.raises(PointSetParseError):
        read_integer_table(path, ("x", "y"))


def test_write_rows(tmp_path):
    path = tmp_path / "t.csv"
    write_rows(path, ["N", "ratio"], [(1, 0.5), (2, 0.25)])
    assert path.read_text() == "N,ratio\n1,0.5\n2,0.25\n"
