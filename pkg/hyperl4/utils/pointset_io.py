"""
CSV readers and writers for point sets and integer tables.

Point sets use the header ``x,y,z,w_re[,w_im]``. Coordinates are integers;
``w_re`` is an integer, a ratio ``p/q`` or a decimal. A file is read in
exact mode when every weight is an integer or ratio and ``w_im`` is absent.
Lines starting with ``#`` and blank lines are ignored.
"""

import csv
import io
import re
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from hyperl4.errors import BoundError, PointSetParseError
from hyperl4.lattice_core import COORD_BOUND
from hyperl4.weighted_set import WeightedSet, WeightMode

POINTSET_HEADER = ("x", "y", "z", "w_re")
RATIO_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def _content_lines(path: Path) -> Iterable[tuple[int, str]]:
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def _split(line: str) -> list[str]:
    return [c.strip() for c in next(csv.reader(io.StringIO(line)))]


def _parse_int(token: str, path: Path, lineno: int, name: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise PointSetParseError(
            f"column '{name}' is not an integer: {token!r}", str(path), lineno
        )
    if abs(value) > COORD_BOUND:
        raise PointSetParseError(
            f"column '{name}' exceeds the coordinate bound 2^20", str(path), lineno
        )
    return value


def read_pointset(path: Path, mode: WeightMode | None = None) -> WeightedSet:
    """Read a weighted point set; mode None picks exact when possible."""
    path = Path(path)
    rows = _content_lines(path)
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise PointSetParseError("file is empty", str(path), 1)
    columns = _split(header)
    if tuple(columns[:4]) != POINTSET_HEADER or columns[4:] not in ([], ["w_im"]):
        raise PointSetParseError(
            f"expected header x,y,z,w_re[,w_im], got {header!r}",
            str(path),
            header_line,
        )
    has_im = len(columns) == 5
    if has_im and mode == WeightMode.EXACT:
        raise PointSetParseError(
            "exact mode does not accept a w_im column", str(path), header_line
        )

    entries: list[tuple[tuple[int, int, int], str, str, int]] = []
    seen: dict[tuple[int, int, int], int] = {}
    for lineno, line in rows:
        cells = _split(line)
        if len(cells) != len(columns):
            raise PointSetParseError(
                f"expected {len(columns)} columns, got {len(cells)}",
                str(path),
                lineno,
            )
        point = tuple(
            _parse_int(cells[i], path, lineno, columns[i]) for i in range(3)
        )
        if point in seen:
            raise PointSetParseError(
                f"duplicate point {point} (first on line {seen[point]})",
                str(path),
                lineno,
            )
        seen[point] = lineno
        entries.append((point, cells[3], cells[4] if has_im else "0", lineno))

    exact_ok = not has_im and all(RATIO_RE.match(e[1]) for e in entries)
    if mode is None:
        mode = WeightMode.EXACT if exact_ok else WeightMode.NUMERIC
    if mode == WeightMode.EXACT:
        return _exact_set(entries, path)
    return _numeric_set(entries, path)


def _exact_set(entries, path: Path) -> WeightedSet:
    points, weights = [], []
    for point, re_tok, _, lineno in entries:
        if not RATIO_RE.match(re_tok):
            raise PointSetParseError(
                f"exact weight must be an integer or p/q, got {re_tok!r}",
                str(path),
                lineno,
            )
        try:
            w = Fraction(re_tok)
        except ZeroDivisionError:
            raise PointSetParseError(
                f"zero denominator in {re_tok!r}", str(path), lineno
            )
        if w < 0:
            raise PointSetParseError(
                "exact weights must be nonnegative", str(path), lineno
            )
        points.append(point)
        weights.append(w)
    try:
        return WeightedSet(points, weights, WeightMode.EXACT)
    except BoundError as e:
        raise PointSetParseError(e.message, str(path))


def _to_float(token: str, path: Path, lineno: int) -> float:
    try:
        return float(Fraction(token)) if "/" in token else float(token)
    except (ValueError, ZeroDivisionError):
        raise PointSetParseError(f"bad weight {token!r}", str(path), lineno)


def _numeric_set(entries, path: Path) -> WeightedSet:
    points = [e[0] for e in entries]
    weights = [
        complex(_to_float(re_tok, path, n), _to_float(im_tok, path, n))
        for _, re_tok, im_tok, n in entries
    ]
    return WeightedSet(points, weights, WeightMode.NUMERIC)


def _format_weight(w) -> list[str]:
    if isinstance(w, Fraction):
        return [str(w)]
    w = complex(w)
    return [repr(w.real), repr(w.imag)]


def write_pointset(path: Path, f: WeightedSet) -> None:
    """Write a point set; exact weights as p/q, numeric as w_re,w_im."""
    header = list(POINTSET_HEADER) + ([] if f.is_exact else ["w_im"])
    rows = [
        [str(c) for c in p.as_tuple()] + _format_weight(w) for p, w in f.items()
    ]
    write_rows(path, header, rows)


def read_integer_table(
    path: Path, columns: Sequence[str], optional: Sequence[str] = ()
) -> list[tuple[int, ...]]:
    """Rows of an integer CSV whose header is `columns` (+ optional tail)."""
    path = Path(path)
    rows = _content_lines(path)
    try:
        header_line, header = next(rows)
    except StopIteration:
        raise PointSetParseError("file is empty", str(path), 1)
    found = _split(header)
    n = len(columns)
    if found[:n] != list(columns) or found[n:] != list(optional)[: len(found) - n]:
        raise PointSetParseError(
            f"expected header {','.join(columns)}, got {header!r}",
            str(path),
            header_line,
        )
    out = []
    for lineno, line in rows:
        cells = _split(line)
        if len(cells) != len(found):
            raise PointSetParseError(
                f"expected {len(found)} columns, got {len(cells)}",
                str(path),
                lineno,
            )
        out.append(
            tuple(_parse_int(c, path, lineno, name) for c, name in zip(cells, found))
        )
    return out


def write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
