from fractions import Fraction

import numpy as np
import pytest
from conftest import line_set, random_set
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperl4.errors import BoundError, BudgetExceededError, ContainmentError
from hyperl4.lattice_core import LatticePoint, Plane
from hyperl4.resonance_count import (
    Method,
    bilinear_l2,
    build_bucket_table,
    error_part,
    heavy_planes,
    line_point_bound,
    omega1_plane_restricted,
    omega_bucketed,
    omega_of,
    omega_oracle,
    omega_total,
    on_any_plane,
    slice_A,
    to_jsonable,
    work_budget,
)
from hyperl4.weighted_set import WeightedSet, WeightMode

small = st.integers(min_value=-3, max_value=3)
exact_sets = st.dictionaries(
    st.tuples(small, small, small), st.integers(1, 3), min_size=1, max_size=12
).map(lambda d: WeightedSet.from_mapping(d, WeightMode.EXACT))


def _line_closed_form(N: int) -> int:
    return (2 * N**3 + N) // 3


@pytest.mark.parametrize("N", [1, 2, 3, 4, 7, 10])
def test_cone_line_closed_form(N):
    report = omega_of(line_set(N))
    assert report.omega == _line_closed_form(N)
    assert report.omega1 == 0
    assert report.omega2 == report.omega
    assert report.method == Method.BUCKETED


def test_line_closed_form_small_values():
    assert [omega_of(line_set(N)).omega for N in (1, 2, 3)] == [1, 6, 19]


def test_two_points_only_trivial_quadruples():
    f = WeightedSet.characteristic([(0, 0, 0), (1, 2, 3)])
    report = omega_of(f)
    assert (report.omega, report.omega1, report.omega2) == (6, 0, 6)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_product_closed_form(N):
    f = WeightedSet.characteristic(
        [(x, x, y) for x in range(1, N + 1) for y in range(1, N + 1)]
    )
    report = omega_of(f)
    assert report.omega == _line_closed_form(N) * (2 * N * N - N)
    assert report.omega1 == 0


@given(exact_sets)
@settings(max_examples=60, deadline=None)
def test_bucketed_matches_oracle_exact(f):
    fast = omega_of(f)
    slow = omega_oracle(f, f, f, f)
    assert fast.omega == slow.omega
    assert fast.omega1 == slow.omega1
    assert fast.omega2 == slow.omega2
    assert fast.omega >= 0


@pytest.mark.parametrize("seed", range(5))
def test_bucketed_matches_oracle_on_four_numeric_functions(seed):
    rng = np.random.default_rng(seed)
    fs = [random_set(rng, 14, 3, exact=False) for _ in range(4)]
    fast = omega_bucketed(*fs)
    slow = omega_oracle(*fs)
    for a, b in (
        (fast.omega, slow.omega),
        (fast.omega1, slow.omega1),
        (fast.omega2, slow.omega2),
    ):
        assert abs(complex(a) - complex(b)) <= 1e-9 * max(1.0, abs(complex(b)))


def test_fractional_weights_stay_exact():
    f = WeightedSet(
        [(0, 0, 0), (1, 1, 0), (2, 2, 0)],
        [Fraction(1, 2), Fraction(1, 3), 1],
        WeightMode.EXACT,
    )
    fast = omega_of(f)
    assert isinstance(fast.omega, Fraction)
    assert fast.omega == omega_oracle(f, f, f, f).omega


def test_parallel_slabs_agree_with_serial(rng):
    f = random_set(rng, 60, 5)
    assert omega_of(f, jobs=2).omega == omega_of(f, jobs=1).omega


def test_omega_total_matches_bucketed(rng):
    f = random_set(rng, 40, 4)
    total, _ = omega_total(f, f, f, f)
    assert total == omega_of(f).omega


def test_budget_counts_resonant_pairs_not_pairs():
    # 200 ordered pairs, but 670 resonant quadruples along the cone line
    f = line_set(10)
    with pytest.raises(BudgetExceededError) as exc:
        omega_of(f, budget=300)
    stats = exc.value.stats
    assert stats["resonant_pairs"] > 300
    assert {"key_count", "max_bucket"} <= stats.keys()
    assert "resonant_pairs" in str(exc.value)


def test_budget_allows_many_pairs_with_few_resonances():
    # 18 ordered pairs but only the 15 trivial quadruples
    f = WeightedSet.characteristic([(0, 0, 0), (3, 1, 2), (1, 4, 2)])
    report = omega_of(f, budget=16)
    assert report.omega == 15
    assert report.pair_count == 18
    total, stats = omega_total(f, f, f, f, budget=16)
    assert total == 15
    assert stats.resonant_pairs == 15


def test_work_budget_from_environment(monkeypatch):
    monkeypatch.delenv("HYPERL4_WORK_BUDGET", raising=False)
    assert work_budget() == 10**10
    monkeypatch.setenv("HYPERL4_WORK_BUDGET", "1e6")
    assert work_budget() == 10**6
    monkeypatch.setenv("HYPERL4_WORK_BUDGET", "-5")
    with pytest.raises(BoundError):
        work_budget()


@given(exact_sets)
@settings(max_examples=40, deadline=None)
def test_bilinear_of_f_with_itself_is_omega(f):
    assert bilinear_l2(f, f) == omega_of(f).omega


def test_bilinear_matches_bucket_table(rng):
    g1 = random_set(rng, 15, 3)
    g2 = random_set(rng, 12, 3)
    table = build_bucket_table(g1, g2)
    expected = sum((table.value(i) ** 2 for i in range(len(table))), Fraction(0))
    assert bilinear_l2(g1, g2) == expected
    assert table.total_pairs() == len(g1) * len(g2)


def test_bucket_table_keeps_pairs():
    g = WeightedSet.characteristic([(0, 0, 0), (1, 1, 0)])
    table = build_bucket_table(g, g, keep_pairs=True)
    # (0,0,0)+(1,1,0) in both orders share one key
    assert sorted(len(p) for p in table.pairs) == [1, 1, 2]


def _slice_by_loops(a, b, N):
    out = []
    r = range(-N, N + 1)
    for x1 in r:
        for x2 in r:
            for x3 in r:
                y = (a[0] - x1, a[1] - x2, a[2] - x3)
                h = x1 * x1 - x2 * x2 - x3 * x3 + y[0] ** 2 - y[1] ** 2 - y[2] ** 2
                if h == b:
                    out.append(LatticePoint(x1, x2, x3))
    return out


@pytest.mark.parametrize("a, b", [((0, 0, 0), 0), ((1, 2, -1), -3), ((2, 0, 0), 2)])
def test_slice_A_matches_loops(a, b):
    assert slice_A(LatticePoint(*a), b, 4) == _slice_by_loops(a, b, 4)


def test_slice_A_bounds():
    with pytest.raises(BoundError):
        slice_A(LatticePoint(0, 0, 0), 0, 257)


def test_heavy_planes_and_error_part(rng):
    on_plane = [(k, k, z) for k in range(-4, 5) for z in range(-2, 3)]
    scattered = [(9, 0, 3), (-7, 2, 8), (5, -9, 1)]
    f = WeightedSet.characteristic(on_plane + scattered)
    planes = heavy_planes(f, 2)
    assert Plane(LatticePoint(1, -1, 0), 0) in planes
    total = float(f.l2_norm_sq())
    for plane in planes:
        mass = int((plane.values(f.points) == plane.offset).sum())
        assert 4 * mass >= total
    rest = error_part(f, 2)
    assert not on_any_plane(rest.points, planes).any()
    assert len(rest) < len(f)


def test_heavy_planes_requires_nonnegative_weights():
    f = WeightedSet([(0, 0, 0)], [-1.0], WeightMode.NUMERIC)
    with pytest.raises(BoundError):
        heavy_planes(f, 2)
    assert heavy_planes(WeightedSet.empty(), 2) == []


@pytest.mark.parametrize("seed", range(3))
def test_line_point_bound_holds(seed):
    rng = np.random.default_rng(seed)
    S = random_set(rng, 50, 6)
    for xi in (LatticePoint(1, 0, 0), LatticePoint(1, 1, 0), LatticePoint(2, 1, 1)):
        assert line_point_bound(xi, S).holds


def test_line_point_bound_on_a_line():
    S = line_set(6)
    result = line_point_bound(LatticePoint(1, 1, 0), S)
    assert result.max_count == 6
    assert result.holds


def _plane_set(normal, offset, points):
    plane = Plane(LatticePoint(*normal), offset)
    return plane, WeightedSet.characteristic(
        [p for p in points if plane.contains(LatticePoint(*p))]
    )


def test_plane_restricted_matches_full_count():
    box = [(x, y, z) for x in range(-3, 4) for y in range(-3, 4) for z in range(-3, 4)]
    H, f = _plane_set((1, -1, 0), 0, box)
    report = omega1_plane_restricted([f, f, f, f], [H, H, H, H])
    assert report.value == omega_of(f).omega1
    assert report.all_planes_equal
    assert report.normal_rank == 1
    assert report.line_case_keys + report.curve_case_keys > 0


def test_plane_restricted_validation():
    H = Plane(LatticePoint(1, 1, 0), 0)
    inside = WeightedSet.characteristic([(1, -1, 0)])
    outside = WeightedSet.characteristic([(1, 1, 0)])
    with pytest.raises(ContainmentError):
        omega1_plane_restricted([inside, inside, inside, outside], [H] * 4)
    off_cone = Plane(LatticePoint(1, 0, 0), 1)
    with pytest.raises(BoundError):
        omega1_plane_restricted([inside] * 4, [H, H, H, off_cone])


def test_to_jsonable_keeps_exactness():
    payload = {
        "a": Fraction(3, 4),
        "b": [Fraction(2), 1 + 0j, 2 - 1j],
        3: (np.int64(5), np.float64(0.5)),
    }
    assert to_jsonable(payload) == {
        "a": "3/4",
        "b": [2, 1.0, {"re": 2.0, "im": -1.0}],
        "3": [5, 0.5],
    }
