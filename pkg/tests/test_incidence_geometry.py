import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperl4.errors import BoundError, ContainmentError
from hyperl4.incidence_geometry import (
    GreatCircle,
    LatticeLine,
    PlanarLine,
    ProjectivePoint,
    count_incidences_point_line,
    count_incidences_point_line_naive,
    count_incidences_sphere,
    count_incidences_sphere_projected,
    crossing_incidence_count,
    crossing_incidence_naive,
    hemisphere_partition,
    line_family_oracle,
    line_family_statistics,
    rich_lines,
    rich_lines_oracle,
    szemeredi_trotter_bound,
)
from hyperl4.lattice_core import LatticePoint

c = st.integers(min_value=-6, max_value=6)
planar_points = st.lists(st.tuples(c, c), min_size=1, max_size=30, unique=True)
spatial_points = st.lists(st.tuples(c, c, c), min_size=2, max_size=25, unique=True)
planar_lines = st.lists(
    st.tuples(c, c, c).filter(lambda t: t[0] or t[1]), min_size=1, max_size=20
).map(lambda ts: [PlanarLine.of(*t) for t in ts])
directions = st.tuples(c, c, c).filter(any)


def test_planar_line_normalisation():
    assert PlanarLine.of(-2, -4, 6) == PlanarLine(1, 2, -3)
    assert PlanarLine.through((0, 0), (2, 2)) == PlanarLine(1, -1, 0)
    with pytest.raises(BoundError):
        PlanarLine.of(0, 0, 1)


def test_grid_incidences():
    grid = [(x, y) for x in range(3) for y in range(3)]
    lines = [PlanarLine.of(1, 0, -x) for x in range(3)] + [PlanarLine.of(1, -1, 0)]
    assert count_incidences_point_line(grid, lines) == 12
    assert count_incidences_point_line([], lines) == 0


@given(planar_points, planar_lines)
@settings(max_examples=100, deadline=None)
def test_point_line_incidences_match_naive(points, lines):
    fast = count_incidences_point_line(points, lines)
    assert fast == count_incidences_point_line_naive(points, lines)
    n, m = len(set(points)), len(set(lines))
    assert fast <= szemeredi_trotter_bound(n, m) * 4


def test_lattice_line_canonical_base():
    line = LatticeLine.through(LatticePoint(5, 5, 0), LatticePoint(2, 2, 0))
    assert line.direction == LatticePoint(1, 1, 0)
    assert line.base == LatticePoint(0, 0, 0)
    assert 0 <= line.base.dot(line.direction) < line.direction.norm_sq()
    assert line == LatticeLine.from_points(LatticePoint(-3, -3, 0), LatticePoint(7, 7, 0))
    assert line.contains(LatticePoint(100, 100, 0))


def test_rich_lines_on_a_grid():
    grid = [(x, y, 0) for x in range(4) for y in range(4)]
    found = rich_lines(grid, 4)
    # four rows, four columns, two diagonals
    assert len(found) == 10
    assert all(r.count == 4 for r in found)
    assert found == rich_lines_oracle(grid, 4)


@given(spatial_points, st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_rich_lines_match_oracle(points, k):
    assert rich_lines(points, k) == rich_lines_oracle(points, k)


def test_rich_lines_rejects_small_k():
    with pytest.raises(BoundError):
        rich_lines([(0, 0, 0), (1, 0, 0)], 1)


def test_sphere_incidences_of_coordinate_frame():
    points = [ProjectivePoint.of(v) for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    circles = [GreatCircle.of(v) for v in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
    # every axis lies on the two circles orthogonal to the other axes
    assert count_incidences_sphere(points, circles) == 6
    total, per_piece = count_incidences_sphere_projected(points, circles)
    assert total == 6
    assert sum(per_piece.values()) == 6


def test_projective_points_identify_antipodes():
    assert ProjectivePoint.of((-2, 0, 4)) == ProjectivePoint.of((1, 0, -2))


@given(st.lists(directions, min_size=1, max_size=20), st.lists(directions, min_size=1, max_size=20))
@settings(max_examples=80, deadline=None)
def test_projected_count_matches_direct(pts, normals):
    points = [ProjectivePoint.of(v) for v in pts]
    circles = [GreatCircle.of(v) for v in normals]
    total, _ = count_incidences_sphere_projected(points, circles)
    assert total == count_incidences_sphere(points, circles)


@given(st.lists(directions, min_size=1, max_size=30))
def test_hemisphere_pieces_are_open_half_spheres(pts):
    pieces = hemisphere_partition(ProjectivePoint.of(v) for v in pts)
    seen = 0
    for (axis, sign), members in pieces.items():
        seen += len(members)
        for p in members:
            assert sign * p.rep.as_tuple()[axis] > 0
    assert seen == len({ProjectivePoint.of(v) for v in pts})


def _lines_through(xi, dirs):
    return [LatticeLine.through(xi, LatticePoint(*d)) for d in dirs]


@given(st.lists(directions, min_size=1, max_size=15), st.lists(directions, min_size=1, max_size=15))
@settings(max_examples=60, deadline=None)
def test_crossing_count_matches_naive(d1, d2):
    xi = LatticePoint(2, -1, 3)
    L, Lp = _lines_through(xi, d1), _lines_through(xi, d2)
    assert crossing_incidence_count(xi, L, Lp) == crossing_incidence_naive(L, Lp)


def test_crossing_count_requires_common_point():
    xi = LatticePoint(0, 0, 0)
    far = LatticeLine.through(LatticePoint(1, 0, 0), LatticePoint(0, 1, 0))
    with pytest.raises(ContainmentError):
        crossing_incidence_count(xi, [far], [])


@given(spatial_points)
@settings(max_examples=60, deadline=None)
def test_line_family_statistics_match_oracle(points):
    assert line_family_statistics(points).rows == line_family_oracle(points)


def test_line_family_skips_cone_directions():
    # all points on a cone-direction line
    assert line_family_statistics([(k, k, 0) for k in range(5)]).rows == []
    table = line_family_statistics([(k, 0, 0) for k in range(5)])
    assert [(r.s, r.lines, r.incidences) for r in table.rows] == [(4, 1, 5)]
