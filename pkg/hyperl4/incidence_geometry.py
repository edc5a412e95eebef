"""
Exact incidence counting.

Points and lines in the plane, rich lines of planar or spatial lattice
sets, great circles on the sphere (all directions are primitive integer
vectors, incidence is an integer dot product) and the crossing count of
two line families through a common point.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from hyperl4.errors import BoundError, ContainmentError
from hyperl4.lattice_core import (
    COORD_BOUND,
    LatticePoint,
    canonical_direction,
    canonical_sign,
    crossing_form,
    form_h,
    primitive,
)
from hyperl4.weighted_set import encode_points

RICH_LINES_MAX_POINTS = 10**5
LINE_FAMILY_MAX_POINTS = 10**4


@dataclass(frozen=True, slots=True, order=True)
class PlanarLine:
    """A x + B y + C = 0 with gcd(A, B, C) = 1 and (A, B) canonically signed."""

    A: int
    B: int
    C: int

    @classmethod
    def of(cls, A: int, B: int, C: int) -> "PlanarLine":
        if A == 0 and B == 0:
            raise BoundError("A planar line needs (A, B) != (0, 0)")
        g = math.gcd(A, B, C)
        a, b, c = A // g, B // g, C // g
        if canonical_sign((a, b)) != (a, b):
            a, b, c = -a, -b, -c
        return cls(a, b, c)

    @classmethod
    def through(cls, p: Sequence[int], q: Sequence[int]) -> "PlanarLine":
        if tuple(p) == tuple(q):
            raise BoundError("Two distinct points are needed for a line")
        A = q[1] - p[1]
        B = p[0] - q[0]
        return cls.of(A, B, -(A * p[0] + B * p[1]))

    def contains(self, p: Sequence[int]) -> bool:
        return self.A * p[0] + self.B * p[1] + self.C == 0


@dataclass(frozen=True, slots=True, order=True)
class LatticeLine:
    """A lattice line in space.

    direction is primitive and canonically signed; base is the unique point
    of the line with 0 <= base . direction < |direction|^2.
    """

    direction: LatticePoint
    base: LatticePoint

    @classmethod
    def through(cls, point: LatticePoint, direction: LatticePoint) -> "LatticeLine":
        v = canonical_direction(direction)
        t = point.dot(v) // v.norm_sq()
        return cls(v, point - v.scale(t))

    @classmethod
    def from_points(cls, p: LatticePoint, q: LatticePoint) -> "LatticeLine":
        if p == q:
            raise BoundError("Two distinct points are needed for a line")
        return cls.through(p, q - p)

    def contains(self, xi: LatticePoint) -> bool:
        return not any((xi - self.base).cross(self.direction))

    def to_dict(self) -> dict:
        return {
            "direction": list(self.direction.as_tuple()),
            "base": list(self.base.as_tuple()),
        }


@dataclass(frozen=True, slots=True, order=True)
class ProjectivePoint:
    """A direction in S^2 up to sign, stored as a primitive integer vector."""

    rep: LatticePoint

    @classmethod
    def of(cls, v: Sequence[int] | LatticePoint) -> "ProjectivePoint":
        p = v if isinstance(v, LatticePoint) else LatticePoint.of(v)
        return cls(canonical_direction(p))


@dataclass(frozen=True, slots=True, order=True)
class GreatCircle:
    """{x in S^2 : x . normal = 0}."""

    normal: ProjectivePoint

    @classmethod
    def of(cls, v: Sequence[int] | LatticePoint) -> "GreatCircle":
        return cls(ProjectivePoint.of(v))

    @classmethod
    def crossing(cls, direction: LatticePoint) -> "GreatCircle":
        """c_l = {v : v . A v_l = 0} for a line with direction v_l."""
        return cls(ProjectivePoint.of(direction.apply_a()))


@dataclass(frozen=True)
class RichLine:
    line: LatticeLine
    count: int

    def to_dict(self) -> dict:
        return {**self.line.to_dict(), "count": self.count}


# Points and lines in the plane


def _planar_points(points: Iterable[Sequence[int]]) -> list[tuple[int, int]]:
    return sorted({(int(p[0]), int(p[1])) for p in points})


def count_incidences_point_line(
    points: Iterable[Sequence[int]], lines: Iterable[PlanarLine]
) -> int:
    """#{(p, l) : p on l} for distinct points and distinct lines."""
    pts = _planar_points(points)
    ls = sorted(set(lines))
    if not pts or not ls:
        return 0
    arr = np.array(pts, dtype=np.int64)
    by_normal: dict[tuple[int, int], list[int]] = {}
    for line in ls:
        by_normal.setdefault((line.A, line.B), []).append(line.C)
    total = 0
    for (A, B), offsets in by_normal.items():
        values, counts = np.unique(arr[:, 0] * A + arr[:, 1] * B, return_counts=True)
        table = dict(zip(values.tolist(), counts.tolist()))
        total += sum(table.get(-c, 0) for c in offsets)
    return total


def count_incidences_point_line_naive(
    points: Iterable[Sequence[int]], lines: Iterable[PlanarLine]
) -> int:
    """O(nm) double loop."""
    pts = _planar_points(points)
    return sum(1 for line in set(lines) for p in pts if line.contains(p))


def szemeredi_trotter_bound(n_points: int, n_lines: int) -> float:
    """n^(2/3) m^(2/3) + n + m."""
    return (n_points * n_lines) ** (2 / 3) + n_points + n_lines


def rich_lines_bound(n_points: int, k: int) -> float:
    """n^2 / k^2 + n."""
    return n_points * n_points / (k * k) + n_points


# Rich lines in the plane or in space


def _as_spatial(points: Iterable[Sequence[int]]) -> np.ndarray:
    rows = set()
    for p in points:
        t = tuple(int(c) for c in p)
        if len(t) == 2:
            t = (t[0], t[1], 0)
        elif len(t) != 3:
            raise ValueError(f"Points must have 2 or 3 coordinates, got {len(t)}")
        rows.add(t)
    arr = np.array(sorted(rows), dtype=np.int64).reshape(-1, 3)
    if arr.size and int(np.abs(arr).max()) > COORD_BOUND // 2:
        raise BoundError("Rich-line scans need coordinates within 2^19")
    return arr


def _directions_from(pts: np.ndarray, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Primitive canonical directions from point i to every other point.

    Returns (directions, indices of the other points).
    """
    others = np.concatenate([np.arange(i), np.arange(i + 1, len(pts))])
    d = pts[others] - pts[i]
    g = np.gcd.reduce(np.abs(d), axis=1)
    d = d // g[:, None]
    lead = np.where(d[:, 0] != 0, d[:, 0], np.where(d[:, 1] != 0, d[:, 1], d[:, 2]))
    d = d * np.sign(lead)[:, None]
    return d, others


def _group_directions(
    d: np.ndarray, others: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct directions, how many points each carries, min point index."""
    codes = encode_points(d)
    order = np.argsort(codes, kind="stable")
    c = codes[order]
    starts = np.flatnonzero(np.concatenate(([True], c[1:] != c[:-1])))
    counts = np.diff(np.append(starts, len(c)))
    first = np.minimum.reduceat(others[order], starts)
    return d[order][starts], counts, first


def rich_lines(points: Iterable[Sequence[int]], k: int) -> list[RichLine]:
    """Every line containing at least k of the points, with its exact count.

    Each line is reported once, from its lowest-indexed point in sorted order.
    """
    if k < 2:
        raise BoundError(f"k must be >= 2, got {k}")
    pts = _as_spatial(points)
    n = len(pts)
    if n > RICH_LINES_MAX_POINTS:
        raise BoundError(f"rich_lines supports at most {RICH_LINES_MAX_POINTS} points")
    found: list[RichLine] = []
    for i in range(n - 1):
        d, others = _directions_from(pts, i)
        dirs, counts, first = _group_directions(d, others)
        own = (first > i) & (counts + 1 >= k)
        p = LatticePoint(*pts[i].tolist())
        for v, m in zip(dirs[own].tolist(), counts[own].tolist()):
            found.append(RichLine(LatticeLine.through(p, LatticePoint(*v)), m + 1))
    found.sort(key=lambda r: (-r.count, r.line))
    logging.debug("rich_lines(k=%d): %d lines over %d points", k, len(found), n)
    return found


def rich_lines_oracle(points: Iterable[Sequence[int]], k: int) -> list[RichLine]:
    """Pair loop: reconstruct every line from point pairs, then count."""
    pts = [LatticePoint(*row) for row in _as_spatial(points).tolist()]
    lines = {
        LatticeLine.from_points(p, q)
        for a, p in enumerate(pts)
        for q in pts[a + 1 :]
    }
    out = []
    for line in lines:
        m = sum(1 for p in pts if line.contains(p))
        if m >= k:
            out.append(RichLine(line, m))
    out.sort(key=lambda r: (-r.count, r.line))
    return out


# Great circles


def _rows(items: Iterable[ProjectivePoint | GreatCircle]) -> np.ndarray:
    vecs = []
    for it in items:
        rep = it.rep if isinstance(it, ProjectivePoint) else it.normal.rep
        vecs.append(rep.as_tuple())
    return np.array(sorted(set(vecs)), dtype=np.int64).reshape(-1, 3)


def count_incidences_sphere(
    points: Iterable[ProjectivePoint], circles: Iterable[GreatCircle]
) -> int:
    """#{(v, c) : v . normal(c) = 0} over distinct points and circles."""
    P = _rows(points)
    C = _rows(circles)
    if len(P) == 0 or len(C) == 0:
        return 0
    total = 0
    step = max(1, (1 << 22) // len(C))
    for start in range(0, len(P), step):
        total += int(np.count_nonzero(P[start : start + step] @ C.T == 0))
    return total


def _dominant_axis(v: Sequence[int]) -> int:
    mags = [abs(x) for x in v]
    return mags.index(max(mags))


def hemisphere_partition(
    points: Iterable[ProjectivePoint],
) -> dict[tuple[int, int], list[ProjectivePoint]]:
    """Split directions by dominant coordinate (axis, sign).

    Each piece lies in the open half sphere {sign * x_axis > 0}; ties go to
    the lowest axis.
    """
    pieces: dict[tuple[int, int], list[ProjectivePoint]] = {}
    for p in sorted(set(points)):
        v = p.rep.as_tuple()
        axis = _dominant_axis(v)
        sign = 1 if v[axis] > 0 else -1
        pieces.setdefault((axis, sign), []).append(p)
    return pieces


def gnomonic(v: Sequence[int], axis: int) -> tuple[Fraction, Fraction]:
    """Psi: divide the two other coordinates by the one on `axis`."""
    j, k = [i for i in range(3) if i != axis]
    return Fraction(v[j], v[axis]), Fraction(v[k], v[axis])


def gnomonic_line(normal: Sequence[int], axis: int) -> tuple[int, int, int]:
    """Image of a great circle: n_j X + n_k Y + n_axis = 0."""
    j, k = [i for i in range(3) if i != axis]
    return normal[j], normal[k], normal[axis]


def count_incidences_sphere_projected(
    points: Iterable[ProjectivePoint], circles: Iterable[GreatCircle]
) -> tuple[int, dict[tuple[int, int], int]]:
    """Incidences counted chart by chart in rational planar coordinates."""
    normals = [tuple(r) for r in _rows(circles).tolist()]
    per_piece: dict[tuple[int, int], int] = {}
    for (axis, sign), piece in hemisphere_partition(points).items():
        planar = [gnomonic(p.rep.as_tuple(), axis) for p in piece]
        by_ab: dict[tuple[int, int], list[int]] = {}
        for n in normals:
            A, B, C = gnomonic_line(n, axis)
            by_ab.setdefault((A, B), []).append(C)
        count = 0
        for (A, B), offsets in by_ab.items():
            images = Counter(A * X + B * Y for X, Y in planar)
            count += sum(images.get(Fraction(-C), 0) for C in offsets)
        per_piece[(axis, sign)] = count
    return sum(per_piece.values()), per_piece


# Crossing incidences


def crossing_incidence_count(
    xi: LatticePoint,
    L: Iterable[LatticeLine],
    L_prime: Iterable[LatticeLine],
) -> int:
    """#{(l, l') : v_l . A v_l' = 0} for lines through xi.

    Realised as incidences between the directions {v_l} and the great
    circles {c_l'} with normals A v_l'.
    """
    lines = sorted(set(L))
    lines_p = sorted(set(L_prime))
    for line in (*lines, *lines_p):
        if not line.contains(xi):
            raise ContainmentError(f"Line {line} does not pass through {xi}")
    # distinct lines through one point have distinct directions
    points = [ProjectivePoint(line.direction) for line in lines]
    circles = [GreatCircle.crossing(line.direction) for line in lines_p]
    return count_incidences_sphere(points, circles)


def crossing_incidence_naive(
    L: Iterable[LatticeLine], L_prime: Iterable[LatticeLine]
) -> int:
    return sum(
        1
        for a in set(L)
        for b in set(L_prime)
        if crossing_form(a.direction, b.direction) == 0
    )


def crossing_bound(n: int, m: int) -> float:
    return (n * m) ** (2 / 3) + n + m


# Line families L_s


@dataclass
class LineFamilyRow:
    s: int
    lines: int
    incidences: int

    def to_dict(self) -> dict:
        return {"s": self.s, "lines": self.lines, "incidences": self.incidences}


@dataclass
class LineFamilyTable:
    """Off-cone lines grouped by dyadic richness s <= #(l cap S) < 2s."""

    rows: list[LineFamilyRow]
    per_point: dict[int, dict[LatticePoint, int]]

    def row(self, s: int) -> LineFamilyRow | None:
        return next((r for r in self.rows if r.s == s), None)

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "per_point": {
                str(s): {str(p): c for p, c in sorted(table.items())}
                for s, table in sorted(self.per_point.items())
            },
        }


def _dyadic(m: int) -> int:
    return 1 << (m.bit_length() - 1)


def line_family_statistics(points: Iterable[Sequence[int]]) -> LineFamilyTable:
    """Lines with >= 2 points of S and off-cone direction, by dyadic family.

    For each point, the lines through it are the distinct directions to the
    other points; a line with m points is seen m times, once per point.
    """
    pts = _as_spatial(points)
    n = len(pts)
    if n > LINE_FAMILY_MAX_POINTS:
        raise BoundError(
            f"line_family_statistics supports at most {LINE_FAMILY_MAX_POINTS} points"
        )
    seen_by_size: Counter[int] = Counter()
    per_point: dict[int, dict[LatticePoint, int]] = {}
    for i in range(n):
        if n < 2:
            break
        d, others = _directions_from(pts, i)
        dirs, counts, _ = _group_directions(d, others)
        off_cone = (
            dirs[:, 0] * dirs[:, 0] - dirs[:, 1] * dirs[:, 1] - dirs[:, 2] * dirs[:, 2]
        ) != 0
        sizes = counts[off_cone] + 1
        if len(sizes) == 0:
            continue
        p = LatticePoint(*pts[i].tolist())
        for m, c in Counter(sizes.tolist()).items():
            seen_by_size[m] += c
            s = _dyadic(m)
            table = per_point.setdefault(s, {})
            table[p] = table.get(p, 0) + c
    families: dict[int, list[int]] = {}
    for m, seen in seen_by_size.items():
        # every line with m points was seen once from each of its points
        lines = seen // m
        fam = families.setdefault(_dyadic(m), [0, 0])
        fam[0] += lines
        fam[1] += lines * m
    rows = [LineFamilyRow(s, v[0], v[1]) for s, v in sorted(families.items())]
    return LineFamilyTable(rows=rows, per_point=per_point)


def line_family_oracle(points: Iterable[Sequence[int]]) -> list[LineFamilyRow]:
    """Pair-loop reconstruction of the same table."""
    pts = [LatticePoint(*row) for row in _as_spatial(points).tolist()]
    lines = {
        LatticeLine.from_points(p, q)
        for a, p in enumerate(pts)
        for q in pts[a + 1 :]
    }
    families: dict[int, list[int]] = {}
    for line in lines:
        if form_h(line.direction) == 0:
            continue
        m = sum(1 for p in pts if line.contains(p))
        fam = families.setdefault(_dyadic(m), [0, 0])
        fam[0] += 1
        fam[1] += m
    return [LineFamilyRow(s, v[0], v[1]) for s, v in sorted(families.items())]


def primitive_direction(v: Sequence[int]) -> LatticePoint:
    return LatticePoint.of(canonical_sign(primitive(v)))
