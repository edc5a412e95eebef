"""
Finitely supported weight functions on Z^3.

A WeightedSet is immutable. Points are stored as a lexicographically sorted
(n, 3) int64 array together with a packed uint64 code per point, so lookups
are a ``searchsorted`` away. Weights are either exact nonnegative rationals
(``WeightMode.EXACT``) or complex doubles (``WeightMode.NUMERIC``).
"""

import math
from enum import StrEnum
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Any, Iterable, Iterator, Mapping, Sequence

import numpy as np

from hyperl4.errors import BoundError
from hyperl4.lattice_core import (
    COORD_BOUND,
    LatticePoint,
    check_bound_array,
)

CODE_OFFSET = COORD_BOUND
CODE_RADIX = 2 * COORD_BOUND + 1

# int64 accumulation stays exact while every partial sum is below this.
INT64_SAFE = 1 << 62

Weight = Fraction | complex


class WeightMode(StrEnum):
    EXACT = "exact"
    NUMERIC = "numeric"


def encode_points(points: np.ndarray) -> np.ndarray:
    """Pack rows of an (n, 3) int64 array into order-preserving uint64 codes."""
    p = np.asarray(points, dtype=np.int64) + CODE_OFFSET
    u = p.astype(np.uint64)
    radix = np.uint64(CODE_RADIX)
    return (u[:, 0] * radix + u[:, 1]) * radix + u[:, 2]


def _as_points_array(points: Any) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = points.astype(np.int64, copy=False)
    else:
        arr = np.array(
            [p.as_tuple() if isinstance(p, LatticePoint) else tuple(p)
             for p in points],
            dtype=np.int64,
        )
    arr = arr.reshape(-1, 3)
    check_bound_array(arr)
    return arr


def _to_fraction(w: Any) -> Fraction:
    if isinstance(w, bool):
        raise TypeError("Boolean weights are not allowed")
    if isinstance(w, (int, np.integer, Rational)):
        return Fraction(int(w)) if isinstance(w, np.integer) else Fraction(w)
    raise TypeError(f"Exact-mode weight must be rational, got {type(w).__name__}")


def _infer_mode(weights: Sequence[Any]) -> WeightMode:
    for w in weights:
        if isinstance(w, (float, complex, np.floating, np.complexfloating)):
            return WeightMode.NUMERIC
    return WeightMode.EXACT


class WeightedSet:
    """Immutable map from lattice points to nonzero weights."""

    def __init__(
        self,
        points: np.ndarray,
        weights: Sequence[Any] | np.ndarray,
        mode: WeightMode,
    ):
        pts = _as_points_array(points)
        if len(pts) != len(weights):
            raise ValueError("points and weights must have the same length")
        codes = encode_points(pts)
        order = np.argsort(codes, kind="stable")
        codes = codes[order]
        if len(codes) > 1 and np.any(codes[1:] == codes[:-1]):
            raise ValueError("WeightedSet points must be distinct")
        pts = pts[order]

        if mode == WeightMode.EXACT:
            fr = [_to_fraction(weights[i]) for i in order.tolist()]
            if any(w < 0 for w in fr):
                raise BoundError("Exact-mode weights must be nonnegative")
            keep = np.array([w != 0 for w in fr], dtype=bool).reshape(-1)
            self._exact: tuple[Fraction, ...] | None = tuple(
                w for w, k in zip(fr, keep.tolist()) if k
            )
            self._numeric: np.ndarray | None = None
        elif mode == WeightMode.NUMERIC:
            arr = np.asarray(weights, dtype=np.complex128)[order]
            keep = arr != 0
            self._exact = None
            self._numeric = arr[keep]
            self._numeric.setflags(write=False)
        else:
            raise ValueError(f"Unknown weight mode: {mode!r}")

        self._points = pts[keep]
        self._codes = codes[keep]
        self._points.setflags(write=False)
        self._codes.setflags(write=False)
        self.mode = WeightMode(mode)

    # Constructors

    @classmethod
    def from_mapping(
        cls,
        entries: Mapping[Any, Any],
        mode: WeightMode | None = None,
    ) -> "WeightedSet":
        keys = list(entries.keys())
        weights = [entries[k] for k in keys]
        if mode is None:
            mode = _infer_mode(weights)
        return cls(_as_points_array(keys), weights, mode)

    @classmethod
    def characteristic(cls, points: Iterable[Any]) -> "WeightedSet":
        """0/1 weights on a set of points (duplicates collapse)."""
        arr = _as_points_array(list(points))
        if len(arr):
            arr = np.unique(arr, axis=0)
        return cls(arr, [1] * len(arr), WeightMode.EXACT)

    @classmethod
    def uniform(
        cls, points: Iterable[Any], weight: Any
    ) -> "WeightedSet":
        arr = _as_points_array(list(points))
        if len(arr):
            arr = np.unique(arr, axis=0)
        mode = _infer_mode([weight])
        return cls(arr, [weight] * len(arr), mode)

    @classmethod
    def empty(cls, mode: WeightMode = WeightMode.EXACT) -> "WeightedSet":
        return cls(np.zeros((0, 3), dtype=np.int64), [], mode)

    @classmethod
    def delta(cls, point: Any, weight: Any = 1) -> "WeightedSet":
        return cls.from_mapping({_key(point): weight})

    # Basic accessors

    def __len__(self) -> int:
        return len(self._points)

    def __bool__(self) -> bool:
        return len(self._points) > 0

    def __iter__(self) -> Iterator[tuple[LatticePoint, Weight]]:
        return self.items()

    def __repr__(self) -> str:
        return f"WeightedSet(n={len(self)}, mode={self.mode.value})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightedSet):
            return NotImplemented
        if self.mode != other.mode or len(self) != len(other):
            return False
        if not np.array_equal(self._codes, other._codes):
            return False
        if self.is_exact:
            return self._exact == other._exact
        return bool(np.array_equal(self._numeric, other._numeric))

    __hash__ = None  # type: ignore[assignment]

    @property
    def is_exact(self) -> bool:
        return self.mode == WeightMode.EXACT

    @property
    def points(self) -> np.ndarray:
        """Sorted (n, 3) int64 array (read-only)."""
        return self._points

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    def support(self) -> list[LatticePoint]:
        return [LatticePoint(*row) for row in self._points.tolist()]

    def weights(self) -> list[Weight]:
        if self.is_exact:
            return list(self._exact)
        return [complex(w) for w in self._numeric.tolist()]

    def items(self) -> Iterator[tuple[LatticePoint, Weight]]:
        return zip(self.support(), self.weights())

    def to_dict(self) -> dict[tuple[int, int, int], Weight]:
        return {
            tuple(row): w
            for row, w in zip(self._points.tolist(), self.weights())
        }

    def index_of(self, query: np.ndarray) -> np.ndarray:
        """Index of each query row in this set, -1 where absent."""
        q = np.asarray(query, dtype=np.int64).reshape(-1, 3)
        if len(self) == 0 or len(q) == 0:
            return np.full(len(q), -1, dtype=np.int64)
        inside = np.all(np.abs(q) <= COORD_BOUND, axis=1)
        idx = np.full(len(q), -1, dtype=np.int64)
        if not inside.any():
            return idx
        qc = encode_points(q[inside])
        pos = np.searchsorted(self._codes, qc)
        pos = np.minimum(pos, len(self._codes) - 1)
        hit = self._codes[pos] == qc
        sub = np.where(hit, pos, -1)
        idx[inside] = sub
        return idx

    def weight_at(self, point: Any) -> Weight:
        idx = int(self.index_of(np.array([_key(point)]))[0])
        if idx < 0:
            return Fraction(0) if self.is_exact else 0j
        return self._exact[idx] if self.is_exact else complex(self._numeric[idx])

    def __contains__(self, point: Any) -> bool:
        return int(self.index_of(np.array([_key(point)]))[0]) >= 0

    # Weight views used by the kernels

    @cached_property
    def _integer_scaling(self) -> tuple[np.ndarray, int]:
        if not self.is_exact:
            raise TypeError("Integer scaling requires exact mode")
        denom = 1
        for w in self._exact:
            denom = math.lcm(denom, w.denominator)
        nums = [int(w * denom) for w in self._exact]
        big = max(nums, default=0)
        dtype = np.int64 if big < INT64_SAFE else object
        arr = np.array(nums, dtype=dtype).reshape(-1)
        arr.setflags(write=False)
        return arr, denom

    def integer_weights(self) -> tuple[np.ndarray, int]:
        """(numerators, D) with weight_i = numerators[i] / D, exact mode only."""
        return self._integer_scaling

    def numeric_weights(self) -> np.ndarray:
        """Weights as complex128 (exact weights are converted)."""
        if self.is_exact:
            return np.array(
                [complex(float(w)) for w in self._exact], dtype=np.complex128
            ).reshape(-1)
        return self._numeric

    def abs_weights(self) -> np.ndarray:
        return np.abs(self.numeric_weights())

    def is_nonnegative(self) -> bool:
        if self.is_exact:
            return True
        w = self._numeric
        return bool(np.all(w.imag == 0) and np.all(w.real >= 0))

    def uniform_weight(self) -> Weight | None:
        """The common weight if all weights are equal, else None."""
        if len(self) == 0:
            return None
        if self.is_exact:
            first = self._exact[0]
            return first if all(w == first for w in self._exact) else None
        first = self._numeric[0]
        if np.all(self._numeric == first):
            return complex(first)
        return None

    def l2_norm_sq(self) -> Fraction | float:
        if self.is_exact:
            return sum((w * w for w in self._exact), Fraction(0))
        return math.fsum(np.abs(self._numeric) ** 2)

    def l2_norm(self) -> float:
        return math.sqrt(float(self.l2_norm_sq()))

    # Geometry of the support

    def support_box(self) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        if len(self) == 0:
            return None
        lo = tuple(int(v) for v in self._points.min(axis=0))
        hi = tuple(int(v) for v in self._points.max(axis=0))
        return lo, hi

    def max_abs_coord(self) -> int:
        if len(self) == 0:
            return 0
        return int(np.abs(self._points).max())

    @cached_property
    def _diam_sq(self) -> int:
        return diameter_sq(self._points)

    def diam_sq(self) -> int:
        """Exact squared Euclidean diameter of the support."""
        return self._diam_sq

    def diam(self) -> float:
        return math.sqrt(self._diam_sq)

    # Transformations (all return new sets)

    def _with_points(self, pts: np.ndarray) -> "WeightedSet":
        raw = self._exact if self.is_exact else self._numeric
        return WeightedSet(pts, raw, self.mode)

    def translate(self, v: Any) -> "WeightedSet":
        shift = np.array(_key(v), dtype=np.int64)
        return self._with_points(self._points + shift)

    def negate(self) -> "WeightedSet":
        return self._with_points(-self._points)

    def swap23(self) -> "WeightedSet":
        return self._with_points(self._points[:, [0, 2, 1]])

    def restrict(self, mask: np.ndarray) -> "WeightedSet":
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if self.is_exact:
            kept = [w for w, k in zip(self._exact, mask.tolist()) if k]
            return WeightedSet(self._points[mask], kept, self.mode)
        return WeightedSet(
            self._points[mask], self._numeric[mask], self.mode
        )

    def with_weights(
        self, weights: Sequence[Any] | np.ndarray, mode: WeightMode
    ) -> "WeightedSet":
        return WeightedSet(self._points, weights, mode)

    def to_numeric(self) -> "WeightedSet":
        if not self.is_exact:
            return self
        return WeightedSet(
            self._points, self.numeric_weights(), WeightMode.NUMERIC
        )

    def scaled(self, factor: Any) -> "WeightedSet":
        if self.is_exact and isinstance(factor, (int, Rational)):
            return WeightedSet(
                self._points, [w * factor for w in self._exact], self.mode
            )
        return WeightedSet(
            self._points,
            self.numeric_weights() * complex(factor),
            WeightMode.NUMERIC,
        )

    def add(self, other: "WeightedSet") -> "WeightedSet":
        """Pointwise sum; exact only if both operands are exact."""
        acc: dict[tuple[int, int, int], Any] = {}
        exact = self.is_exact and other.is_exact
        for ws in (self, other):
            src = ws.weights() if exact else ws.numeric_weights().tolist()
            for row, w in zip(ws.points.tolist(), src):
                key = tuple(row)
                acc[key] = acc.get(key, 0) + w
        mode = WeightMode.EXACT if exact else WeightMode.NUMERIC
        if not acc:
            return WeightedSet.empty(mode)
        return WeightedSet.from_mapping(acc, mode)

    def dominates(self, other: "WeightedSet", tol: float = 0.0) -> bool:
        """self >= other pointwise (absolute values in numeric mode)."""
        idx = self.index_of(other.points)
        if np.any(idx < 0):
            return False
        if self.is_exact and other.is_exact:
            mine = [self._exact[i] for i in idx.tolist()]
            return all(a >= b for a, b in zip(mine, other._exact))
        mine = self.abs_weights()[idx]
        return bool(np.all(mine + tol >= other.abs_weights()))


def _key(point: Any) -> tuple[int, int, int]:
    if isinstance(point, LatticePoint):
        return point.as_tuple()
    t = tuple(int(c) for c in point)
    if len(t) != 3:
        raise ValueError(f"Expected 3 coordinates, got {len(t)}")
    return t


def diameter_sq(points: np.ndarray, max_block: int = 1 << 22) -> int:
    """Exact max squared distance between rows of an (n, 3) int array.

    A point can only be an endpoint of a diameter if its distance to the
    farthest bounding-box corner reaches the lower bound found by a double
    sweep; the pair scan runs over those candidates only.
    """
    pts = np.asarray(points, dtype=np.int64)
    if len(pts) < 2:
        return 0
    far = int(np.argmax(((pts - pts[0]) ** 2).sum(axis=1)))
    lower = int(((pts - pts[far]) ** 2).sum(axis=1).max())
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    reach = np.maximum((pts - lo) ** 2, (hi - pts) ** 2).sum(axis=1)
    cand = pts[reach >= lower]
    best = lower
    chunk = max(1, max_block // len(cand))
    for start in range(0, len(cand), chunk):
        block = cand[start : start + chunk]
        d = block[:, None, :] - cand[None, :, :]
        best = max(best, int((d * d).sum(axis=2).max()))
    return best
