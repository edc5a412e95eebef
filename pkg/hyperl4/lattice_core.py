"""
Exact integer arithmetic on the lattice Z^3.

The hyperbolic form is h(xi) = xi1^2 - xi2^2 - xi3^2, i.e. xi . A xi with
A = diag(1, -1, -1). Everything here is exact integer arithmetic; numpy is
only used to vectorise scans whose entries provably fit in int64.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from hyperl4.errors import BoundError

# |x_i| <= 2^20 keeps h, crossing_form and packed bucket keys inside int64.
COORD_BOUND = 1 << 20

# Largest box half-width scanned by the brute-force cone enumerator.
BRUTEFORCE_MAX_M = 4096

A_DIAG = np.array([1, -1, -1], dtype=np.int64)

ConeMethod = Literal["bruteforce", "parametrized"]


def _check_coords(coords: Iterable[int]) -> None:
    for c in coords:
        if abs(c) > COORD_BOUND:
            raise BoundError(
                f"Coordinate {c} exceeds the supported bound 2^20"
            )


def check_bound_array(points: np.ndarray) -> None:
    """Reject an (n, 3) integer array with any |coordinate| > 2^20."""
    if points.size and int(np.abs(points).max()) > COORD_BOUND:
        raise BoundError("Point set has a coordinate exceeding the bound 2^20")


@dataclass(frozen=True, slots=True, order=True)
class LatticePoint:
    """A frequency xi in Z^3."""

    x1: int
    x2: int
    x3: int

    def __post_init__(self) -> None:
        for name in ("x1", "x2", "x3"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(
                value, (int, np.integer)
            ):
                raise TypeError(f"LatticePoint.{name} must be an integer")
            object.__setattr__(self, name, int(value))
        _check_coords((self.x1, self.x2, self.x3))

    @classmethod
    def of(cls, coords: Sequence[int]) -> "LatticePoint":
        if len(coords) != 3:
            raise ValueError(f"Expected 3 coordinates, got {len(coords)}")
        return cls(int(coords[0]), int(coords[1]), int(coords[2]))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x1, self.x2, self.x3)

    def __iter__(self):
        return iter((self.x1, self.x2, self.x3))

    def __add__(self, other: "LatticePoint") -> "LatticePoint":
        return LatticePoint(
            self.x1 + other.x1, self.x2 + other.x2, self.x3 + other.x3
        )

    def __sub__(self, other: "LatticePoint") -> "LatticePoint":
        return LatticePoint(
            self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3
        )

    def __neg__(self) -> "LatticePoint":
        return LatticePoint(-self.x1, -self.x2, -self.x3)

    def scale(self, k: int) -> "LatticePoint":
        return LatticePoint(k * self.x1, k * self.x2, k * self.x3)

    def dot(self, other: "LatticePoint") -> int:
        return self.x1 * other.x1 + self.x2 * other.x2 + self.x3 * other.x3

    def cross(self, other: "LatticePoint") -> tuple[int, int, int]:
        # Returned as a tuple: the cross product can leave the coordinate bound.
        return (
            self.x2 * other.x3 - self.x3 * other.x2,
            self.x3 * other.x1 - self.x1 * other.x3,
            self.x1 * other.x2 - self.x2 * other.x1,
        )

    def apply_a(self) -> "LatticePoint":
        """A xi = (x1, -x2, -x3)."""
        return LatticePoint(self.x1, -self.x2, -self.x3)

    def norm_sq(self) -> int:
        return self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3

    def is_zero(self) -> bool:
        return self.x1 == 0 and self.x2 == 0 and self.x3 == 0

    def __str__(self) -> str:
        return f"({self.x1},{self.x2},{self.x3})"


ORIGIN = LatticePoint(0, 0, 0)


def form_h(xi: LatticePoint) -> int:
    """h(xi) = xi1^2 - xi2^2 - xi3^2."""
    return xi.x1 * xi.x1 - xi.x2 * xi.x2 - xi.x3 * xi.x3


def form_h_array(points: np.ndarray) -> np.ndarray:
    """Vectorised h over an (n, 3) int64 array."""
    pts = np.asarray(points, dtype=np.int64)
    return pts[:, 0] * pts[:, 0] - pts[:, 1] * pts[:, 1] - pts[:, 2] * pts[:, 2]


def crossing_form(s: LatticePoint, t: LatticePoint) -> int:
    """The bilinear form s . A t = s1 t1 - s2 t2 - s3 t3."""
    return s.x1 * t.x1 - s.x2 * t.x2 - s.x3 * t.x3


def gcd_point(xi: LatticePoint) -> int:
    """gcd of |coordinates|; 0 exactly for the origin."""
    return math.gcd(xi.x1, xi.x2, xi.x3)


def cone_contains(xi: LatticePoint) -> bool:
    """True iff h(xi) = 0. The origin is on the cone."""
    return form_h(xi) == 0


def canonical_sign(coords: Sequence[int]) -> tuple[int, ...]:
    """Flip the sign so the first nonzero coordinate is positive."""
    for c in coords:
        if c > 0:
            return tuple(int(x) for x in coords)
        if c < 0:
            return tuple(-int(x) for x in coords)
    return tuple(int(x) for x in coords)


def primitive(coords: Sequence[int]) -> tuple[int, ...]:
    """Divide out the gcd of the coordinates (zero vector is returned as is)."""
    g = math.gcd(*(int(c) for c in coords))
    if g == 0:
        return tuple(int(c) for c in coords)
    return tuple(int(c) // g for c in coords)


def canonical_direction(xi: LatticePoint) -> LatticePoint:
    """Primitive, canonically signed representative of the line R.xi."""
    if xi.is_zero():
        raise BoundError("The zero vector has no direction")
    return LatticePoint.of(canonical_sign(primitive(xi.as_tuple())))


@dataclass(frozen=True, slots=True, order=True)
class Plane:
    """Lattice plane n . xi = offset with primitive, canonically signed n."""

    normal: LatticePoint
    offset: int

    def __post_init__(self) -> None:
        if self.normal.is_zero():
            raise BoundError("Plane normal must be nonzero")
        if gcd_point(self.normal) != 1:
            raise BoundError(f"Plane normal {self.normal} is not primitive")
        if canonical_sign(self.normal.as_tuple()) != self.normal.as_tuple():
            raise BoundError(
                f"Plane normal {self.normal} is not canonically signed"
            )

    @classmethod
    def through(cls, point: LatticePoint, normal: LatticePoint) -> "Plane":
        """The plane through `point` with normal direction `normal`."""
        n = canonical_direction(normal)
        return cls(n, n.dot(point))

    @classmethod
    def from_equation(cls, normal: Sequence[int], offset: int) -> "Plane":
        """Normalise an arbitrary integer equation n . xi = c.

        Raises BoundError if the equation has no integer solutions after
        dividing by gcd(n).
        """
        g = math.gcd(*(int(c) for c in normal))
        if g == 0:
            raise BoundError("Plane normal must be nonzero")
        if offset % g:
            raise BoundError(
                f"Plane {tuple(normal)} . xi = {offset} has no lattice points"
            )
        prim = tuple(int(c) // g for c in normal)
        c = offset // g
        canon = canonical_sign(prim)
        if canon != prim:
            c = -c
        return cls(LatticePoint.of(canon), c)

    def contains(self, xi: LatticePoint) -> bool:
        return self.normal.dot(xi) == self.offset

    def values(self, points: np.ndarray) -> np.ndarray:
        """n . xi for each row of an (n, 3) array."""
        n = np.array(self.normal.as_tuple(), dtype=np.int64)
        return np.asarray(points, dtype=np.int64) @ n

    def to_dict(self) -> dict:
        return {"normal": list(self.normal.as_tuple()), "offset": self.offset}


@dataclass(frozen=True)
class ConeCatalog:
    """The set Cone^irr_M of primitive cone points with |xi| <= M."""

    M: int
    points: tuple[LatticePoint, ...]
    _array: np.ndarray = field(repr=False, compare=False, default=None)
    _members: frozenset = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        arr = np.array(
            [p.as_tuple() for p in self.points], dtype=np.int64
        ).reshape(-1, 3)
        object.__setattr__(self, "_array", arr)
        object.__setattr__(self, "_members", frozenset(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, xi: LatticePoint) -> bool:
        return xi in self._members

    def as_array(self) -> np.ndarray:
        return self._array.copy()

    def normals(self) -> list[LatticePoint]:
        """One canonical representative per +/- pair, sorted."""
        return sorted(
            {canonical_direction(p) for p in self.points}
        )

    def ratio(self) -> float:
        """#Cone^irr_M / M."""
        return len(self.points) / self.M


def _check_radius(M: int) -> None:
    if isinstance(M, bool) or not isinstance(M, int) or M < 1:
        raise BoundError(f"M must be a positive integer, got {M!r}")
    if M > COORD_BOUND:
        raise BoundError(f"M={M} exceeds the supported bound 2^20")


def _isqrt_array(values: np.ndarray) -> np.ndarray:
    """Exact floor square root of a nonnegative int64 array."""
    r = np.floor(np.sqrt(values.astype(np.float64))).astype(np.int64)
    # float sqrt is within one unit for values below 2^52
    r = np.where(r * r > values, r - 1, r)
    r = np.where((r + 1) * (r + 1) <= values, r + 1, r)
    return r


def _cone_bruteforce(M: int) -> set[tuple[int, int, int]]:
    """Scan the box [-M,M]^3, solving h = 0 for x1 exactly.

    |xi| <= M and h(xi) = 0 give |xi|^2 = 2 x1^2, so |x2|, |x3| <= M/sqrt(2);
    each (x2, x3) row of the box determines x1 up to sign.
    """
    if M > BRUTEFORCE_MAX_M:
        raise BoundError(
            f"Brute-force cone scan limited to M <= {BRUTEFORCE_MAX_M}"
        )
    found: set[tuple[int, int, int]] = set()
    m_sq = M * M
    x3 = np.arange(-M, M + 1, dtype=np.int64)
    for x2 in range(-M, M + 1):
        s = x2 * x2 + x3 * x3
        r = _isqrt_array(s)
        ok = (r * r == s) & (r > 0) & (2 * s <= m_sq)
        for a, b in zip(r[ok].tolist(), x3[ok].tolist()):
            if math.gcd(a, x2, b) == 1:
                found.add((a, x2, b))
                found.add((-a, x2, b))
    return found


def _cone_parametrized(M: int) -> set[tuple[int, int, int]]:
    """Enumerate coprime odd pairs (m, n).

    With the odd coordinate placed third, a primitive cone point satisfies
    x1 - x2 = +/-m^2, x1 + x2 = +/-n^2, x3 = +/-mn. Its norm is
    sqrt(2) |x1| = (m^2 + n^2) / sqrt(2), so (m^2 + n^2)^2 <= 2 M^2.
    """
    found: set[tuple[int, int, int]] = set()
    limit = 2 * M * M
    m = 1
    while (m * m + 1) ** 2 <= limit:
        n = 1
        while (m * m + n * n) ** 2 <= limit:
            if math.gcd(m, n) == 1:
                x1 = (n * n + m * m) // 2
                x2 = (n * n - m * m) // 2
                x3 = m * n
                for s1 in (1, -1):
                    for s3 in (1, -1):
                        found.add((s1 * x1, s1 * x2, s3 * x3))
                        found.add((s1 * x1, s3 * x3, s1 * x2))
            n += 2
        m += 2
    return found


def enumerate_cone_irr(
    M: int, method: ConeMethod = "parametrized"
) -> ConeCatalog:
    """All xi with h(xi) = 0, xi != 0, gcd(xi) = 1 and |xi| <= M."""
    _check_radius(M)
    if method == "bruteforce":
        found = _cone_bruteforce(M)
    elif method == "parametrized":
        found = _cone_parametrized(M)
    else:
        raise ValueError(f"Unknown cone enumeration method: {method!r}")
    points = tuple(LatticePoint(*p) for p in sorted(found))
    logging.debug("Cone^irr_%d (%s): %d points", M, method, len(points))
    return ConeCatalog(M=M, points=points)


@dataclass(frozen=True, slots=True)
class PythagoreanParam:
    """Parameters (m, n) and the symmetry tag reconstructing a cone point.

    swap: x2 and x3 were exchanged so that the odd coordinate is third.
    sign1: sign of x1 (x2 carries the same sign factor).
    sign3: sign of the odd coordinate.
    """

    m: int
    n: int
    swap: bool
    sign1: int
    sign3: int

    def point(self) -> LatticePoint:
        x1 = self.sign1 * (self.n * self.n + self.m * self.m) // 2
        y2 = self.sign1 * (self.n * self.n - self.m * self.m) // 2
        y3 = self.sign3 * self.m * self.n
        if self.swap:
            return LatticePoint(x1, y3, y2)
        return LatticePoint(x1, y2, y3)

    @property
    def degenerate(self) -> bool:
        """True for the axis points like (1, 1, 0), where m = n = 1."""
        return self.m == self.n


def pythagorean_param(xi: LatticePoint) -> PythagoreanParam:
    """Invert the coprime-odd-pair parametrisation of a primitive cone point."""
    if xi.is_zero() or gcd_point(xi) != 1:
        raise BoundError(f"{xi} is not a primitive nonzero vector")
    if not cone_contains(xi):
        raise BoundError(f"{xi} is not on the cone")
    # x1^2 = x2^2 + x3^2 with gcd 1 forces exactly one of x2, x3 odd
    swap = xi.x3 % 2 == 0
    y2, y3 = (xi.x3, xi.x2) if swap else (xi.x2, xi.x3)
    sign1 = 1 if xi.x1 > 0 else -1
    big, small = sign1 * xi.x1, sign1 * y2
    m = math.isqrt(big - small)
    n = math.isqrt(big + small)
    sign3 = 1 if y3 > 0 else -1
    param = PythagoreanParam(m=m, n=n, swap=swap, sign1=sign1, sign3=sign3)
    if param.point() != xi:
        raise BoundError(f"Failed to parametrise {xi}")
    return param


def lattice_basis_orthogonal_to(d: LatticePoint) -> tuple[
    tuple[int, int, int], tuple[int, int, int]
]:
    """An integer basis of the rank-2 lattice d^perp intersected with Z^3."""
    if d.is_zero():
        raise BoundError("d must be nonzero")
    a, b, c = primitive(d.as_tuple())
    g = math.gcd(a, b)
    if g == 0:
        return (1, 0, 0), (0, 1, 0)
    # a x + b y = g
    x, y = _ext_gcd(a, b)
    u = (b // g, -a // g, 0)
    v = (c * x, c * y, -g)
    return u, v


def _ext_gcd(a: int, b: int) -> tuple[int, int]:
    """Return (x, y) with a x + b y = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    if old_r < 0:
        old_x, old_y = -old_x, -old_y
    return old_x, old_y


def _h_tuple(v: Sequence[int]) -> int:
    return v[0] * v[0] - v[1] * v[1] - v[2] * v[2]


def _b_tuple(s: Sequence[int], t: Sequence[int]) -> int:
    return s[0] * t[0] - s[1] * t[1] - s[2] * t[2]


def cone_directions_orthogonal_to(d: LatticePoint) -> list[LatticePoint]:
    """Primitive cone directions n (canonical sign) with n . d = 0.

    Restricting h to the plane d^perp gives a binary quadratic form
    Q(alpha, beta) = h(alpha u + beta v); its rational isotropic lines are
    the answer. There are at most two.
    """
    u, v = lattice_basis_orthogonal_to(d)
    a = _h_tuple(u)
    b = _b_tuple(u, v)
    c = _h_tuple(v)
    disc = b * b - a * c
    if disc < 0:
        return []
    root = math.isqrt(disc)
    if root * root != disc:
        return []
    coeffs: list[tuple[int, int]] = []
    if a != 0:
        # a alpha^2 + 2 b alpha beta + c beta^2 = 0, beta = a
        coeffs.append((-b + root, a))
        coeffs.append((-b - root, a))
    else:
        coeffs.append((1, 0))
        if b != 0:
            coeffs.append((-c, 2 * b))
    found: set[tuple[int, ...]] = set()
    for alpha, beta in coeffs:
        n = tuple(alpha * u[i] + beta * v[i] for i in range(3))
        if not any(n):
            continue
        found.add(canonical_sign(primitive(n)))
    directions = sorted(LatticePoint.of(n) for n in found)
    for n in directions:
        if form_h(n) != 0 or n.dot(d) != 0:
            raise ArithmeticError(f"Bad isotropic direction {n} for d={d}")
    return directions


def cone_count_box(N: int) -> int:
    """#(Cone intersected with [-N,N]^3), origin and multiples included."""
    if N < 0:
        raise BoundError(f"N must be nonnegative, got {N}")
    if N == 0:
        return 1
    # a primitive cone point with max-norm <= N has |xi| <= sqrt(3) N
    catalog = enumerate_cone_irr(math.isqrt(3 * N * N) + 1)
    total = 1
    for p in catalog.points:
        k_max = N // max(abs(p.x1), abs(p.x2), abs(p.x3))
        total += k_max
    return total


def cone_count_box_bruteforce(N: int) -> int:
    """Direct scan of [-N,N]^3 for h = 0 (oracle for cone_count_box)."""
    if N < 0 or N > 256:
        raise BoundError(f"Brute-force box scan needs 0 <= N <= 256, got {N}")
    r = np.arange(-N, N + 1, dtype=np.int64)
    total = 0
    for x1 in range(-N, N + 1):
        s = r[:, None] * r[:, None] + r[None, :] * r[None, :]
        total += int(np.count_nonzero(s == x1 * x1))
    return total


def cone_m(M: int, N: int) -> list[LatticePoint]:
    """Cone_M restricted to [-N,N]^3: nonzero cone points with |xi|/gcd <= M."""
    _check_radius(M)
    catalog = enumerate_cone_irr(M)
    out: list[LatticePoint] = []
    for p in catalog.points:
        k_max = N // max(abs(p.x1), abs(p.x2), abs(p.x3))
        out.extend(p.scale(k) for k in range(1, k_max + 1))
    return sorted(out)
