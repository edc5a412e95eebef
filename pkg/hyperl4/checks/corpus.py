"""Seeded point-set generators for the acceptance checks."""

import numpy as np

from hyperl4.lattice_core import (
    LatticePoint,
    Plane,
    lattice_basis_orthogonal_to,
)
from hyperl4.weighted_set import WeightedSet, WeightMode


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_points(rng: np.random.Generator, n: int, radius: int) -> np.ndarray:
    """Up to n distinct points of [-radius, radius]^3."""
    pts = rng.integers(-radius, radius + 1, size=(n, 3), dtype=np.int64)
    return np.unique(pts, axis=0)


def random_characteristic(
    rng: np.random.Generator, max_points: int, radius: int
) -> WeightedSet:
    n = int(rng.integers(1, max_points + 1))
    return WeightedSet.characteristic(random_points(rng, n, radius))


def random_exact(
    rng: np.random.Generator, max_points: int, radius: int, max_weight: int = 5
) -> WeightedSet:
    """Integer weights in [1, max_weight]."""
    pts = random_points(rng, int(rng.integers(1, max_points + 1)), radius)
    w = rng.integers(1, max_weight + 1, size=len(pts)).tolist()
    return WeightedSet(pts, w, WeightMode.EXACT)


def random_complex(
    rng: np.random.Generator, max_points: int, radius: int
) -> WeightedSet:
    pts = random_points(rng, int(rng.integers(1, max_points + 1)), radius)
    w = rng.normal(size=len(pts)) + 1j * rng.normal(size=len(pts))
    return WeightedSet(pts, w, WeightMode.NUMERIC)


def planar_grid(n: int, normal: tuple[int, int, int] = (0, 0, 1)) -> WeightedSet:
    """chi of the (2n+1)^2 grid spanned by an integer basis of normal^perp."""
    u, v = lattice_basis_orthogonal_to(LatticePoint.of(normal))
    r = np.arange(-n, n + 1, dtype=np.int64)
    s, t = np.meshgrid(r, r, indexing="ij")
    pts = s.reshape(-1, 1) * np.array(u) + t.reshape(-1, 1) * np.array(v)
    return WeightedSet.characteristic(pts)


def product_set(rng: np.random.Generator, size: int, radius: int) -> WeightedSet:
    """chi of A x B x C for random A, B, C of at most `size` integers each."""
    axes = [
        np.unique(rng.integers(-radius, radius + 1, size=size)) for _ in range(3)
    ]
    g = np.meshgrid(*axes, indexing="ij")
    return WeightedSet.characteristic(np.stack(g, axis=-1).reshape(-1, 3))


def shell_sample(rng: np.random.Generator, N: int, size: int) -> np.ndarray:
    """Distinct points with N/2 < |xi|_inf <= N (N = 1 allows the unit shell)."""
    out = set()
    attempts = 0
    while len(out) < size and attempts < 50 * size:
        attempts += 1
        p = rng.integers(-N, N + 1, size=3)
        if N // 2 < int(np.abs(p).max()) <= N:
            out.add(tuple(int(c) for c in p))
    return np.array(sorted(out), dtype=np.int64).reshape(-1, 3)


def plane_sample(
    rng: np.random.Generator, plane: Plane, radius: int, size: int
) -> np.ndarray:
    """Distinct lattice points of `plane` near a base point, |coords| bounded."""
    n = plane.normal
    u, v = lattice_basis_orthogonal_to(n)
    base = _plane_point(plane)
    st = rng.integers(-radius, radius + 1, size=(size, 2))
    pts = (
        np.array(base, dtype=np.int64)
        + st[:, :1] * np.array(u, dtype=np.int64)
        + st[:, 1:] * np.array(v, dtype=np.int64)
    )
    return np.unique(pts, axis=0)


def _plane_point(plane: Plane) -> tuple[int, int, int]:
    """A lattice point of n . xi = c; n is primitive so one exists."""
    a, b, c = plane.normal.as_tuple()
    # solve with the extended Euclidean algorithm in two steps
    g1, x1, y1 = _egcd(a, b)
    g, s, t = _egcd(g1, c)
    k = plane.offset // g
    return (k * s * x1, k * s * y1, k * t)


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y
