from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperl4.errors import BoundError
from hyperl4.lattice_core import LatticePoint
from hyperl4.weighted_set import WeightedSet, WeightMode, diameter_sq

coord = st.integers(min_value=-30, max_value=30)
point_lists = st.lists(st.tuples(coord, coord, coord), min_size=1, max_size=40, unique=True)


def test_points_are_sorted_and_lookups_work():
    f = WeightedSet([(2, 0, 0), (-1, 5, 0), (0, 0, 1)], [3, 1, 2], WeightMode.EXACT)
    assert f.points.tolist() == [[-1, 5, 0], [0, 0, 1], [2, 0, 0]]
    assert f.weights() == [Fraction(1), Fraction(2), Fraction(3)]
    assert f.weight_at((2, 0, 0)) == 3
    assert LatticePoint(0, 0, 1) in f
    assert (9, 9, 9) not in f
    assert f.index_of(np.array([[0, 0, 1], [1, 1, 1]])).tolist() == [1, -1]


def test_duplicate_points_rejected():
    with pytest.raises(ValueError):
        WeightedSet([(1, 2, 3), (1, 2, 3)], [1, 1], WeightMode.EXACT)


def test_zero_weights_are_dropped():
    f = WeightedSet([(0, 0, 0), (1, 0, 0)], [0, Fraction(1, 2)], WeightMode.EXACT)
    assert len(f) == 1
    g = WeightedSet([(0, 0, 0), (1, 0, 0)], [0j, 1 + 1j], WeightMode.NUMERIC)
    assert len(g) == 1


def test_exact_mode_validation():
    with pytest.raises(BoundError):
        WeightedSet([(0, 0, 0)], [-1], WeightMode.EXACT)
    with pytest.raises(TypeError):
        WeightedSet([(0, 0, 0)], [0.5], WeightMode.EXACT)
    with pytest.raises(TypeError):
        WeightedSet([(0, 0, 0)], [True], WeightMode.EXACT)


def test_coordinate_bound_enforced():
    with pytest.raises(BoundError):
        WeightedSet([(1 << 21, 0, 0)], [1], WeightMode.EXACT)


def test_from_mapping_infers_mode():
    assert WeightedSet.from_mapping({(0, 0, 0): 1}).mode == WeightMode.EXACT
    assert WeightedSet.from_mapping({(0, 0, 0): 1.5}).mode == WeightMode.NUMERIC


def test_uniform_weight():
    assert WeightedSet.characteristic([(0, 0, 0), (1, 1, 1)]).uniform_weight() == 1
    assert WeightedSet([(0, 0, 0), (1, 1, 1)], [1, 2], WeightMode.EXACT).uniform_weight() is None
    assert WeightedSet.empty().uniform_weight() is None


def test_integer_weights_share_denominator():
    f = WeightedSet(
        [(0, 0, 0), (1, 0, 0)], [Fraction(1, 2), Fraction(1, 3)], WeightMode.EXACT
    )
    nums, denom = f.integer_weights()
    assert denom == 6
    assert nums.tolist() == [3, 2]


def test_l2_norm_sq_exact_and_numeric():
    f = WeightedSet([(0, 0, 0), (1, 0, 0)], [Fraction(1, 2), 2], WeightMode.EXACT)
    assert f.l2_norm_sq() == Fraction(17, 4)
    g = WeightedSet([(0, 0, 0)], [3 + 4j], WeightMode.NUMERIC)
    assert g.l2_norm_sq() == pytest.approx(25.0)


def test_diameter_and_box():
    f = WeightedSet.characteristic([(0, 0, 0), (3, 4, 0), (1, 1, 1)])
    assert f.diam_sq() == 25
    assert f.support_box() == ((0, 0, 0), (3, 4, 1))
    assert f.max_abs_coord() == 4
    assert WeightedSet.empty().diam_sq() == 0


@given(point_lists)
@settings(max_examples=100, deadline=None)
def test_diameter_sq_matches_pair_scan(pts):
    arr = np.array(pts, dtype=np.int64)
    expected = max(
        sum((a - b) ** 2 for a, b in zip(p, q)) for p in pts for q in pts
    )
    assert diameter_sq(arr) == expected


def test_transformations():
    f = WeightedSet([(1, 2, 3), (0, 0, 1)], [1, 2], WeightMode.EXACT)
    assert f.translate((1, 0, 0)).weight_at((2, 2, 3)) == 1
    assert f.negate().weight_at((0, 0, -1)) == 2
    assert f.swap23().weight_at((1, 3, 2)) == 1
    assert f.scaled(Fraction(1, 2)).weight_at((0, 0, 1)) == 1
    assert f.to_numeric().mode == WeightMode.NUMERIC


def test_add_merges_and_cancels():
    f = WeightedSet([(0, 0, 0), (1, 0, 0)], [1, 2], WeightMode.EXACT)
    g = WeightedSet([(1, 0, 0), (2, 0, 0)], [3, 1], WeightMode.EXACT)
    s = f.add(g)
    assert s.to_dict() == {(0, 0, 0): 1, (1, 0, 0): 5, (2, 0, 0): 1}
    zero = f.to_numeric().add(f.to_numeric().scaled(-1))
    assert len(zero) == 0


def test_dominates():
    big = WeightedSet([(0, 0, 0), (1, 0, 0)], [2, 2], WeightMode.EXACT)
    small = WeightedSet([(1, 0, 0)], [1], WeightMode.EXACT)
    outside = WeightedSet([(5, 0, 0)], [1], WeightMode.EXACT)
    assert big.dominates(small)
    assert not small.dominates(big)
    assert not big.dominates(outside)


def test_restrict_keeps_masked_points():
    f = WeightedSet([(0, 0, 0), (1, 0, 0), (2, 0, 0)], [1, 2, 3], WeightMode.EXACT)
    g = f.restrict(np.array([True, False, True]))
    assert g.to_dict() == {(0, 0, 0): 1, (2, 0, 0): 3}


def test_equality_depends_on_points_and_weights():
    a = WeightedSet.characteristic([(0, 0, 0), (1, 1, 1)])
    b = WeightedSet.characteristic([(1, 1, 1), (0, 0, 0)])
    c = WeightedSet([(0, 0, 0), (1, 1, 1)], [1, 2], WeightMode.EXACT)
    assert a == b
    assert a != c
