import math
from fractions import Fraction

import numpy as np
import pytest
from conftest import line_set, random_set

from hyperl4.errors import BoundError, ContainmentError
from hyperl4.resonance_count import omega_of, omega_oracle, on_any_plane
from hyperl4.strichartz_lab import (
    ExtremizerKind,
    ExtremizerSpec,
    atomic_decomposition,
    cube_omega2_profile,
    diam_form_ratio,
    extremizer,
    fit_loglog,
    good_bad_split,
    heavy_radius,
    l4_fourth_power,
    l4_norm_exact,
    l4_quadrature,
    main_estimate_ratio,
    mu,
    mu_general,
    scaling_exponent,
)
from hyperl4.weighted_set import WeightedSet, WeightMode


@pytest.mark.parametrize(
    "p, expected", [(2, 0.0), (4, 0.25), (6, 2 / 3), (10, 1.0), (math.inf, 1.5)]
)
def test_mu(p, expected):
    assert mu(p) == pytest.approx(expected)


def test_mu_general_validation():
    assert mu_general(2, 1, 4) == pytest.approx(0.25)
    with pytest.raises(BoundError):
        mu(1.5)
    with pytest.raises(BoundError):
        mu_general(3, 4, 4)


def test_extremizer_supports():
    assert len(extremizer(ExtremizerSpec("cube", 2))) == 125
    assert len(extremizer(ExtremizerSpec("product", 3))) == 9
    line = extremizer(ExtremizerSpec(ExtremizerKind.LINE, 5))
    assert line.points.tolist()[0] == [1, 1, 0]
    assert line.l2_norm() == pytest.approx(1.0)


def test_extremizer_spec_validation():
    with pytest.raises(BoundError):
        ExtremizerSpec("cube", 65)
    with pytest.raises(BoundError):
        ExtremizerSpec("line", 0)
    with pytest.raises(ValueError):
        ExtremizerSpec("sphere", 4)


@pytest.mark.parametrize("N", [1, 4, 9])
def test_line_extremizer_fourth_power(N):
    f = extremizer(ExtremizerSpec("line", N))
    expected = (2 * N**3 + N) / 3 / N**2
    assert l4_fourth_power(f) == pytest.approx(expected, rel=1e-12)
    assert l4_norm_exact(f) == pytest.approx(expected**0.25, rel=1e-12)


def test_exact_input_gives_exact_fourth_power():
    assert l4_fourth_power(line_set(3)) == Fraction(19)
    assert l4_fourth_power(WeightedSet.empty()) == 0


@pytest.mark.parametrize("seed", range(4))
def test_quadrature_agrees_with_count(seed):
    rng = np.random.default_rng(seed)
    f = random_set(rng, 8, 2, exact=False)
    exact = l4_fourth_power(f)
    assert l4_quadrature(f) == pytest.approx(exact, rel=1e-8)
    assert l4_quadrature(f, oversample=2) == pytest.approx(exact, rel=1e-8)


def test_ratios():
    f = line_set(4)
    norm = l4_norm_exact(f)
    assert main_estimate_ratio(f, 4) == pytest.approx(norm / (4**0.25 * 2))
    assert diam_form_ratio(f) == pytest.approx(norm / (18**0.125 * 2))
    with pytest.raises(ContainmentError):
        main_estimate_ratio(f, 3)


def test_fit_loglog_recovers_power_law():
    xs = [1, 2, 4, 8, 16]
    slope, intercept, stderr = fit_loglog(xs, [3 * x**2 for x in xs])
    assert slope == pytest.approx(2.0)
    assert intercept == pytest.approx(math.log(3))
    assert stderr == pytest.approx(0.0, abs=1e-9)


def test_line_scaling_slope():
    fit = scaling_exponent("line", [8, 16, 32, 64])
    assert fit.predicted == pytest.approx(0.25)
    assert fit.slope == pytest.approx(0.25, abs=0.02)
    assert len(fit.residuals()) == 4


def test_scaling_exponent_validation():
    with pytest.raises(BoundError):
        scaling_exponent("line", [2, 4, 8, 16], p=6)
    with pytest.raises(BoundError):
        scaling_exponent("line", [2, 4, 4, 8])


def test_atomic_decomposition_blocks():
    pts = [(k, 0, 0) for k in range(8)]
    f = WeightedSet(pts, [8, 4, 4, 2, 2, 2, 2, 1], WeightMode.EXACT)
    dec = atomic_decomposition(f)
    assert [len(b.points) for b in dec.blocks] == [1, 2, 4, 1]
    assert [b.level for b in dec.blocks] == [8, 4, 2, 1]
    assert dec.lambda_sq_sum() == 64 + 2 * 16 + 4 * 4 + 8 * 1
    assert dec.envelope() == f
    assert dec.j_max == 3


def test_atomic_envelope_dominates(rng):
    f = random_set(rng, 37, 5)
    assert atomic_decomposition(f).envelope().dominates(f)


def test_atomic_decomposition_validation():
    with pytest.raises(BoundError):
        atomic_decomposition(WeightedSet.empty())
    with pytest.raises(BoundError):
        atomic_decomposition(WeightedSet([(0, 0, 0)], [-1.0], WeightMode.NUMERIC))


def test_heavy_radius():
    assert heavy_radius(16, 0.25) == 2
    assert heavy_radius(10**4, 0.25) == 10
    assert heavy_radius(1, 0.1) == 2


@pytest.mark.parametrize("seed", range(3))
def test_good_bad_split_dominates(seed):
    rng = np.random.default_rng(seed)
    f = random_set(rng, 40, 4)
    split = good_bad_split(f, 4, delta=0.2, c_threshold=0.05)
    assert split.dominates
    assert sorted(split.good_blocks + split.bad_blocks) == list(range(len(split.blocks)))
    for block in split.blocks:
        if not block.good:
            assert block.error_omega2 is not None


def test_good_bad_split_on_a_cone_line():
    split = good_bad_split(line_set(8), 8, delta=0.1, c_threshold=1.0)
    assert split.M == 2
    assert split.dominates
    assert split.to_dict()["f_bad_size"] == len(split.f_bad)


def test_bad_block_gives_only_its_own_planar_points_to_f_bad():
    # (3, 0, 0) lies on no plane through the top point (1, 1, 0)
    f = WeightedSet(
        [(1, 1, 0), (2, 2, 0), (3, 0, 0), (3, 3, 0)], [4, 3, 1, 2], WeightMode.EXACT
    )
    split = good_bad_split(f, 4, delta=0.2, c_threshold=1e-9)
    assert split.M == 2
    assert split.bad_blocks == [0, 1, 2]
    planes = [p for b in split.blocks for p in b.planes]
    assert on_any_plane(split.f_bad.points, planes).all()
    assert split.f_bad.to_dict() == f.to_dict()
    assert all(len(part) == 0 for part in split.good_parts)
    assert all(b.error_omega2 == 0 for b in split.blocks)
    assert split.dominates


def test_good_bad_split_validation():
    f = line_set(4)
    with pytest.raises(BoundError):
        good_bad_split(f, 4, delta=0.3)
    with pytest.raises(ContainmentError):
        good_bad_split(f, 2)


def test_cube_profile_matches_oracle():
    (row,) = cube_omega2_profile([1])
    cube = WeightedSet.characteristic(
        [(x, y, z) for x in (-1, 0, 1) for y in (-1, 0, 1) for z in (-1, 0, 1)]
    )
    slow = omega_oracle(cube, cube, cube, cube)
    assert (row.omega, row.omega1, row.omega2) == (slow.omega, slow.omega1, slow.omega2)
    assert 0 < row.omega2_share <= 1


def test_cube_values_behind_the_shipped_golden():
    cube = extremizer(ExtremizerSpec(ExtremizerKind.CUBE, 2))
    assert float(l4_fourth_power(cube)) == pytest.approx(2014.078125, rel=1e-12)
    chi = WeightedSet.characteristic(ExtremizerSpec(ExtremizerKind.CUBE, 2).support())
    assert omega_of(chi).omega == 128901


@pytest.mark.slow
def test_cube_extremizer_blocks_are_all_good():
    cube = extremizer(ExtremizerSpec(ExtremizerKind.CUBE, 8))
    split = good_bad_split(cube, 8, delta=0.1, c_threshold=1.0)
    assert split.good_blocks == list(range(13))
    assert split.bad_blocks == []
    assert len(split.f_bad) == 0
