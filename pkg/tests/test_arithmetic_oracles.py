import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperl4.arithmetic_oracles import (
    ParabolaQuery,
    SliceCase,
    classify_slice,
    cone_frame,
    count_parabola_points,
    count_parabola_points_naive,
    dominant_square_residue,
    gram_matrix,
    normal_radius,
    parabola_bound_scan,
    parabola_ratio,
    perp_decompose,
    slice_plane_size,
)
from hyperl4.errors import BoundError
from hyperl4.lattice_core import LatticePoint, Plane, enumerate_cone_irr
from hyperl4.resonance_count import slice_A

cone_normals = st.sampled_from(enumerate_cone_irr(8).normals())
small = st.integers(min_value=-4, max_value=4)
small_points = st.builds(LatticePoint, small, small, small)


def test_parabola_known_count():
    # z^2 = y with |y|, |z| <= 4: z in {-2, ..., 2}
    query = ParabolaQuery(1, 0, 4)
    assert count_parabola_points(query) == 5
    assert count_parabola_points_naive(query) == 5
    assert parabola_ratio(query) == pytest.approx(5 / 3)


@given(st.integers(1, 60), st.integers(-500, 500), st.integers(1, 300))
@settings(max_examples=200, deadline=None)
def test_parabola_count_matches_naive(q, omega, N):
    query = ParabolaQuery(q, omega, N)
    assert count_parabola_points(query) == count_parabola_points_naive(query)


def test_parabola_query_validation():
    with pytest.raises(BoundError):
        ParabolaQuery(0, 1, 1)
    with pytest.raises(BoundError):
        ParabolaQuery(1, 0, 0)
    with pytest.raises(BoundError):
        ParabolaQuery(1 << 40, 0, 1 << 40)


def test_parabola_scan_is_reproducible():
    a = parabola_bound_scan(30, 300, 40, seed=7)
    b = parabola_bound_scan(30, 300, 40, seed=7)
    assert a.to_dict() == b.to_dict()
    assert 40 * 5 <= a.queries <= 40 * 6
    assert a.max_ratio == pytest.approx(parabola_ratio(a.worst))
    assert [s["q"] for s in a.structured] == [4, 9, 25]


@pytest.mark.parametrize(
    "q, expected", [(1, (0, 1)), (8, (1, 4)), (9, (0, 3)), (24, (1, 8))]
)
def test_dominant_square_residue(q, expected):
    assert dominant_square_residue(q) == expected


def test_dominant_square_residue_validation():
    with pytest.raises(BoundError):
        dominant_square_residue(0)


def test_adversarial_omega_beats_the_prime_square_family():
    scan = parabola_bound_scan(5, 50, 3, seed=0)
    for row in scan.structured:
        assert row["adversarial_ratio"] >= row["ratio"]
    assert count_parabola_points(ParabolaQuery(9, 0, 81)) == 19
    assert count_parabola_points(ParabolaQuery(9, 729, 81)) == 25
    (p3,) = [row for row in scan.structured if row["q"] == 9]
    assert p3["ratio"] == pytest.approx(19 / 12)
    assert p3["adversarial_ratio"] == pytest.approx(25 / 12)


def test_cone_frame_and_gram_matrix():
    n = LatticePoint(1, 1, 0)
    assert cone_frame(n)[1] == LatticePoint(1, -1, 0)
    assert gram_matrix(n) == [[2, 0, 0], [0, 2, 0], [0, 0, 4]]
    with pytest.raises(BoundError):
        cone_frame(LatticePoint(1, 0, 0))
    with pytest.raises(BoundError):
        cone_frame(LatticePoint(2, 2, 0))


@given(cone_normals)
def test_gram_matrix_is_diagonal(n):
    g = gram_matrix(n)
    assert all(g[i][j] == 0 for i in range(3) for j in range(3) if i != j)
    assert g[0][0] == g[1][1] == n.norm_sq()


def test_normal_radius():
    assert normal_radius(LatticePoint(1, 1, 0)) == 2
    assert normal_radius(LatticePoint(5, 4, 3)) == 8


@given(small_points, cone_normals)
def test_perp_decomposition_reconstructs(xi, n):
    dec = perp_decompose(xi, n)
    assert dec.reconstruct() == tuple(xi.as_tuple())
    assert dec.perp_parallel_to_frame()


def test_classify_slice():
    plane = Plane(LatticePoint(1, 1, 0), 1)
    assert classify_slice(LatticePoint(2, 0, 5), plane) == SliceCase.LINE
    assert classify_slice(LatticePoint(1, 0, 0), plane) == SliceCase.CURVE


@given(small_points, cone_normals, st.integers(-20, 20))
@settings(max_examples=60, deadline=None)
def test_line_case_has_at_most_two_perp_classes(p, n, b):
    plane = Plane(n, n.dot(p))
    a = p.scale(2)
    report = slice_plane_size(a, b, plane, 5)
    assert report.case == SliceCase.LINE
    assert report.perp_classes <= 2
    assert report.count == sum(1 for xi in slice_A(a, b, 5) if plane.contains(xi))


def test_curve_case_report():
    plane = Plane(LatticePoint(1, 1, 0), 0)
    report = slice_plane_size(LatticePoint(1, 0, 0), 1, plane, 6)
    assert report.case == SliceCase.CURVE
    assert report.M == 2
    assert report.bound == pytest.approx(16 * 6**0.5)
    assert all(plane.contains(xi) for xi in report.points)


def test_slice_plane_size_rejects_empty_box():
    plane = Plane(LatticePoint(1, 1, 0), 0)
    with pytest.raises(BoundError):
        slice_plane_size(LatticePoint(0, 0, 0), 0, plane, 0)
