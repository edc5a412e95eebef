"""
Arithmetic counting oracles.

Parabola point counts z^2 = q y + omega in a box, the size of the slice
A_{a,b} cut by a cone-normal plane, and the orthogonal decomposition of a
frequency against the frame {n, An, n x An} of a cone normal.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction

import numpy as np

from hyperl4.errors import BoundError
from hyperl4.lattice_core import (
    LatticePoint,
    Plane,
    cone_contains,
    gcd_point,
)
from hyperl4.resonance_count import SLICE_MAX_N, slice_A

PARABOLA_LIMIT = 1 << 60
PARABOLA_MAX_Z = 10**8
Z_CHUNK = 1 << 20
RESIDUE_MAX_Q = 1 << 20


@dataclass(frozen=True)
class ParabolaQuery:
    """#{(y, z) in [-N, N]^2 : z^2 = q y + omega}."""

    q: int
    omega: int
    N: int

    def __post_init__(self) -> None:
        if self.q < 1 or self.N < 1:
            raise BoundError(f"Need q >= 1 and N >= 1, got q={self.q}, N={self.N}")
        if self.q * self.N > PARABOLA_LIMIT or abs(self.omega) > PARABOLA_LIMIT:
            raise BoundError("Parabola query exceeds the 2^60 arithmetic bound")

    def bound(self) -> float:
        return math.sqrt(self.N) + math.sqrt(self.q)

    def to_dict(self) -> dict:
        return {"q": self.q, "omega": self.omega, "N": self.N}


def _z_range(query: ParabolaQuery) -> int:
    top = query.q * query.N + query.omega
    if top < 0:
        return -1
    return min(query.N, math.isqrt(top))


def count_parabola_points(query: ParabolaQuery) -> int:
    """Scan z with z^2 <= qN + omega and test (z^2 - omega)/q in [-N, N]."""
    zmax = _z_range(query)
    if zmax < 0:
        return 0
    if zmax > PARABOLA_MAX_Z:
        raise BoundError(f"z range {zmax} exceeds the scan limit {PARABOLA_MAX_Z}")
    q, omega, N = query.q, query.omega, query.N
    count = 0
    for start in range(-zmax, zmax + 1, Z_CHUNK):
        z = np.arange(start, min(start + Z_CHUNK, zmax + 1), dtype=np.int64)
        r = z * z - omega
        hit = (r % q == 0) & (r // q >= -N) & (r // q <= N)
        count += int(np.count_nonzero(hit))
    return count


def count_parabola_points_naive(query: ParabolaQuery) -> int:
    """Loop over y and take exact square roots."""
    count = 0
    for y in range(-query.N, query.N + 1):
        v = query.q * y + query.omega
        if v < 0:
            continue
        s = math.isqrt(v)
        if s * s != v or s > query.N:
            continue
        count += 1 if s == 0 else 2
    return count


def parabola_ratio(query: ParabolaQuery) -> float:
    return count_parabola_points(query) / query.bound()


@dataclass
class ParabolaScan:
    max_ratio: float
    worst: ParabolaQuery | None
    queries: int
    structured: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "worst": self.worst.to_dict() if self.worst else None,
            "queries": self.queries,
            "structured": self.structured,
        }


def dominant_square_residue(q: int) -> tuple[int, int]:
    """Residue r mod q hit by the most squares z^2, z in [0, q), with the count.

    Ties go to the smallest residue.
    """
    if q < 1:
        raise BoundError(f"Need q >= 1, got {q}")
    if q > RESIDUE_MAX_Q:
        raise BoundError(f"q={q} exceeds the residue scan limit {RESIDUE_MAX_Q}")
    z = np.arange(q, dtype=np.int64)
    hits = np.bincount(z * z % q, minlength=q)
    r = int(np.argmax(hits))
    return r, int(hits[r])


def _adversarial_omegas(q: int, N: int) -> tuple[int, ...]:
    # omega = r + qN puts the whole class of r in y = (z^2 - omega) / q in [-N, N]
    # for z^2 up to 2qN + r
    r = dominant_square_residue(q)[0] if q <= RESIDUE_MAX_Q else 1
    return tuple(dict.fromkeys((0, 1, r, q * N + 1, q * N + r)))


def parabola_bound_scan(
    q_max: int,
    N_max: int,
    trials: int,
    seed: int = 0,
    primes: tuple[int, ...] = (2, 3, 5),
) -> ParabolaScan:
    """Largest count / (sqrt N + sqrt q) over random and adversarial queries.

    Each trial draws (q, N) uniformly and tries a random omega together with
    omegas in the residue class hit by the most squares mod q. The
    prime-square family q = p^2, N = p^4 is reported alongside, at omega = 0
    and at its best adversarial omega.
    """
    if q_max < 1 or N_max < 1 or trials < 0:
        raise BoundError("parabola_bound_scan needs q_max, N_max >= 1")
    rng = np.random.default_rng(seed)
    best, worst, queries = 0.0, None, 0
    for _ in range(trials):
        q = int(rng.integers(1, q_max + 1))
        N = int(rng.integers(1, N_max + 1))
        omega = int(rng.integers(-q * N, q * N + 1))
        for w in (omega, *_adversarial_omegas(q, N)):
            query = ParabolaQuery(q, w, N)
            ratio = parabola_ratio(query)
            queries += 1
            if ratio > best:
                best, worst = ratio, query
    structured = []
    for p in primes:
        q, N = p * p, p**4
        query = ParabolaQuery(q, 0, N)
        adversarial = max(
            parabola_ratio(ParabolaQuery(q, w, N)) for w in _adversarial_omegas(q, N)
        )
        structured.append(
            {
                **query.to_dict(),
                "ratio": parabola_ratio(query),
                "adversarial_ratio": adversarial,
            }
        )
    logging.info(
        "parabola scan: %d queries, max ratio %.4f at %s", queries, best, worst
    )
    return ParabolaScan(best, worst, queries, structured)


# Slices of A_{a,b} by cone-normal planes


class SliceCase(StrEnum):
    CURVE = "curve_case"
    LINE = "line_case"


def cone_frame(
    n: LatticePoint,
) -> tuple[LatticePoint, LatticePoint, tuple[int, int, int]]:
    """(n, An, n x An) for a primitive nonzero cone vector n."""
    if n.is_zero() or not cone_contains(n):
        raise BoundError(f"{n} is not a nonzero cone vector")
    if gcd_point(n) != 1:
        raise BoundError(f"{n} is not primitive")
    an = n.apply_a()
    return n, an, n.cross(an)


def gram_matrix(n: LatticePoint) -> list[list[int]]:
    """Integer Gram matrix of the frame {n, An, n x An}."""
    a, b, w = cone_frame(n)
    vecs = [a.as_tuple(), b.as_tuple(), w]
    return [[sum(x * y for x, y in zip(u, v)) for v in vecs] for u in vecs]


def normal_radius(n: LatticePoint) -> int:
    """Smallest integer M with |n| <= M."""
    sq = n.norm_sq()
    r = math.isqrt(sq)
    return r if r * r == sq else r + 1


@dataclass
class SliceReport:
    count: int
    case: SliceCase
    M: int
    N: int
    bound: float
    ratio: float
    perp_classes: int
    points: list[LatticePoint] = field(default_factory=list, repr=False)

    def to_dict(self, include_points: bool = False) -> dict:
        out = {
            "count": self.count,
            "case": self.case.value,
            "M": self.M,
            "N": self.N,
            "bound": self.bound,
            "ratio": self.ratio,
            "perp_classes": self.perp_classes,
        }
        if include_points:
            out["points"] = [list(p.as_tuple()) for p in self.points]
        return out


def classify_slice(a: LatticePoint, plane: Plane) -> SliceCase:
    """a/2 in H, tested as n . a == 2c."""
    if plane.normal.dot(a) == 2 * plane.offset:
        return SliceCase.LINE
    return SliceCase.CURVE


def slice_plane_size(a: LatticePoint, b: int, plane: Plane, N: int) -> SliceReport:
    """#(A_{a,b} cap H cap [-N, N]^3) with its case and the case bound.

    Curve case is compared with M^4 sqrt(N), line case with N. perp_classes
    counts the distinct components of xi - a/2 along n x An, which is at
    most 2 in the line case.
    """
    if N < 1 or N > SLICE_MAX_N:
        raise BoundError(f"slice_plane_size needs 1 <= N <= {SLICE_MAX_N}")
    _, _, w = cone_frame(plane.normal)
    hits = [xi for xi in slice_A(a, b, N) if plane.contains(xi)]
    case = classify_slice(a, plane)
    M = normal_radius(plane.normal)
    bound = M**4 * math.sqrt(N) if case == SliceCase.CURVE else float(N)
    perp = {
        sum((2 * x - y) * c for x, y, c in zip(xi.as_tuple(), a.as_tuple(), w))
        for xi in hits
    }
    report = SliceReport(
        count=len(hits),
        case=case,
        M=M,
        N=N,
        bound=bound,
        ratio=len(hits) / bound,
        perp_classes=len(perp),
        points=hits,
    )
    logging.debug("slice_plane_size: %s", report.to_dict())
    return report


# xi-perp decomposition


@dataclass(frozen=True)
class PerpDecomposition:
    """xi = (xi.n / |n|^2) n + (xi.An / |n|^2) An + xi_perp.

    Numerators are integers over the common denominator |n|^2.
    """

    xi: LatticePoint
    n: LatticePoint
    denominator: int
    along_n_num: int
    along_an_num: int
    perp_num: tuple[int, int, int]

    @property
    def along_n(self) -> Fraction:
        return Fraction(self.along_n_num, self.denominator)

    @property
    def along_an(self) -> Fraction:
        return Fraction(self.along_an_num, self.denominator)

    @property
    def perp(self) -> tuple[Fraction, Fraction, Fraction]:
        return tuple(Fraction(c, self.denominator) for c in self.perp_num)

    def reconstruct(self) -> tuple[Fraction, Fraction, Fraction]:
        an = self.n.apply_a()
        return tuple(
            self.along_n * x + self.along_an * y + p
            for x, y, p in zip(self.n.as_tuple(), an.as_tuple(), self.perp)
        )

    def perp_parallel_to_frame(self) -> bool:
        _, _, w = cone_frame(self.n)
        p = self.perp_num
        cross = (
            p[1] * w[2] - p[2] * w[1],
            p[2] * w[0] - p[0] * w[2],
            p[0] * w[1] - p[1] * w[0],
        )
        return cross == (0, 0, 0)

    def to_dict(self) -> dict:
        return {
            "xi": list(self.xi.as_tuple()),
            "n": list(self.n.as_tuple()),
            "denominator": self.denominator,
            "along_n": self.along_n_num,
            "along_an": self.along_an_num,
            "perp": list(self.perp_num),
        }


def perp_decompose(xi: LatticePoint, n: LatticePoint) -> PerpDecomposition:
    _, an, _ = cone_frame(n)
    d = n.norm_sq()
    alpha = xi.dot(n)
    beta = xi.dot(an)
    perp = tuple(
        d * x - alpha * u - beta * v
        for x, u, v in zip(xi.as_tuple(), n.as_tuple(), an.as_tuple())
    )
    return PerpDecomposition(xi, n, d, alpha, beta, perp)
