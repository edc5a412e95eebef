"""
Resonance sums over the quadruple set Q.

Q is the set of (xi1, xi2, xi3, xi4) with xi1 + xi3 = xi2 + xi4 and
h(xi1) + h(xi3) = h(xi2) + h(xi4). For weights f1..f4,

    Omega(f1, f2, f3, f4) = sum over Q of f1(xi1) f2(xi2)* f3(xi3) f4(xi4)*

(the conjugates are no-ops for nonnegative data and make Omega(f, f, f, f)
the fourth power of the space-time L^4 norm). Omega2 collects the
quadruples with xi1 - xi2 or xi1 - xi4 on the cone, Omega1 the rest.
Degenerate quadruples (repeated points) are counted.

The fast path groups ordered pairs by the key (a, b) = (xi + eta, h(xi) +
h(eta)). Keys are processed one a1-slab at a time, so memory stays bounded
by the largest slab. Omega2 is computed directly per cone difference vector
and Omega1 is obtained by subtraction.
"""

import logging
import math
import multiprocessing as mp
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from hyperl4.errors import BoundError, BudgetExceededError, ContainmentError
from hyperl4.lattice_core import (
    LatticePoint,
    Plane,
    canonical_sign,
    enumerate_cone_irr,
    form_h,
    form_h_array,
    gcd_point,
    primitive,
)
from hyperl4.utils.logger import init_kernel_worker, kernel_worker_logging
from hyperl4.weighted_set import INT64_SAFE, WeightedSet, WeightMode

DEFAULT_WORK_BUDGET = 10**10
ORACLE_GUARD = 10**10
PAIR_CHUNK = 1 << 22
DIFF_DIRECT_LIMIT = 1 << 21
SLICE_MAX_N = 256
BUCKET_TABLE_MAX_PAIRS = 1 << 24


class Method(StrEnum):
    ORACLE = "oracle"
    BUCKETED = "bucketed"


def work_budget() -> int:
    """Budget from HYPERL4_WORK_BUDGET, default 10^10."""
    raw = os.environ.get("HYPERL4_WORK_BUDGET")
    if not raw:
        return DEFAULT_WORK_BUDGET
    try:
        value = int(float(raw))
    except ValueError:
        raise BoundError(f"HYPERL4_WORK_BUDGET is not a number: {raw!r}")
    if value <= 0:
        raise BoundError("HYPERL4_WORK_BUDGET must be positive")
    return value


def to_jsonable(value: Any) -> Any:
    """Serialise exact or numeric values (nested in dicts and lists) without
    losing exactness."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return value.numerator
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, complex):
        if value.imag == 0:
            return value.real
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (np.ndarray,)):
        return to_jsonable(value.tolist())
    if isinstance(value, Path):
        return str(value)
    return value


@dataclass
class ResonanceReport:
    """Omega, Omega1, Omega2 with bucket statistics and provenance."""

    omega: Fraction | complex
    omega1: Fraction | complex
    omega2: Fraction | complex
    mode: WeightMode
    method: Method
    bucket_count: int = 0
    max_bucket_size: int = 0
    pair_count: int = 0
    resonant_pairs: int = 0
    cone_differences: int = 0
    timing: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "omega": to_jsonable(self.omega),
            "omega1": to_jsonable(self.omega1),
            "omega2": to_jsonable(self.omega2),
            "mode": self.mode.value,
            "method": self.method.value,
            "bucket_count": self.bucket_count,
            "max_bucket_size": self.max_bucket_size,
            "pair_count": self.pair_count,
            "resonant_pairs": self.resonant_pairs,
            "cone_differences": self.cone_differences,
        }
        if include_timing:
            out["timing"] = round(self.timing, 6)
        return out

    def stats(self) -> dict[str, int]:
        return {
            "bucket_count": self.bucket_count,
            "max_bucket_size": self.max_bucket_size,
            "pair_count": self.pair_count,
            "resonant_pairs": self.resonant_pairs,
        }


# Oracle


def _common_mode(sets: Sequence[WeightedSet]) -> WeightMode:
    if all(s.is_exact for s in sets):
        return WeightMode.EXACT
    return WeightMode.NUMERIC


def _python_items(f: WeightedSet, mode: WeightMode, conj: bool) -> list:
    out = []
    for row, w in zip(f.points.tolist(), f.weights()):
        if mode == WeightMode.NUMERIC:
            w = complex(w)
            if conj:
                w = w.conjugate()
        out.append((tuple(row), w))
    return out


def _h3(p: tuple[int, int, int]) -> int:
    return p[0] * p[0] - p[1] * p[1] - p[2] * p[2]


def omega_oracle(
    f1: WeightedSet, f2: WeightedSet, f3: WeightedSet, f4: WeightedSet
) -> ResonanceReport:
    """Reference enumeration of Q over the four supports.

    Enumerates (xi1, xi2, xi4) and takes xi3 = xi2 + xi4 - xi1, which visits
    exactly the quadruples of the four-fold loop with xi1 + xi3 = xi2 + xi4.
    """
    sizes = [len(f1), len(f2), len(f3), len(f4)]
    if math.prod(sizes) > ORACLE_GUARD:
        raise BoundError(
            f"Oracle guard: product of support sizes {math.prod(sizes)} "
            f"exceeds {ORACLE_GUARD}"
        )
    start = time.perf_counter()
    mode = _common_mode((f1, f2, f3, f4))
    zero: Fraction | complex = Fraction(0) if mode == WeightMode.EXACT else 0j
    items1 = _python_items(f1, mode, False)
    items2 = _python_items(f2, mode, True)
    items4 = _python_items(f4, mode, True)
    lookup3 = dict(_python_items(f3, mode, False))

    total1 = zero
    total2 = zero
    for p1, w1 in items1:
        h1 = _h3(p1)
        for p2, w2 in items2:
            d = (p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2])
            d_on_cone = _h3(d) == 0
            w12 = w1 * w2
            h12 = _h3(p2) - h1
            for p4, w4 in items4:
                p3 = (p2[0] + p4[0] - p1[0], p2[1] + p4[1] - p1[1],
                      p2[2] + p4[2] - p1[2])
                w3 = lookup3.get(p3)
                if w3 is None:
                    continue
                if _h3(p3) != h12 + _h3(p4):
                    continue
                term = w12 * w3 * w4
                e = (p1[0] - p4[0], p1[1] - p4[1], p1[2] - p4[2])
                if d_on_cone or _h3(e) == 0:
                    total2 += term
                else:
                    total1 += term
    return ResonanceReport(
        omega=total1 + total2,
        omega1=total1,
        omega2=total2,
        mode=mode,
        method=Method.ORACLE,
        pair_count=sizes[0] * sizes[2] + sizes[1] * sizes[3],
        timing=time.perf_counter() - start,
    )


# Pair-sum machinery


@dataclass
class _Operand:
    """Points, h-values and integer-scaled or complex weights of one slot."""

    X: np.ndarray
    h: np.ndarray
    v: np.ndarray
    denom: int

    @property
    def n(self) -> int:
        return len(self.X)


def _operands(
    sets: Sequence[WeightedSet], conj_slots: Sequence[bool]
) -> tuple[list[_Operand], WeightMode, Any]:
    """Prepare the operands and the accumulator dtype shared by a kernel."""
    mode = _common_mode(sets)
    ops: list[_Operand] = []
    if mode == WeightMode.EXACT:
        scaled = [f.integer_weights() for f in sets]
        bound = 1
        for nums, _ in scaled:
            bound *= max((abs(int(x)) for x in nums.tolist()), default=0)
        sizes = [len(f) for f in sets]
        # every partial sum is bounded by prod(max |v_i|) times #triples
        bound *= math.prod(sorted(sizes)[1:]) if sizes else 0
        acc = np.int64 if bound < INT64_SAFE else object
        for f, (nums, denom) in zip(sets, scaled):
            ops.append(
                _Operand(
                    f.points, form_h_array(f.points), nums.astype(acc), denom
                )
            )
    else:
        acc = np.complex128
        for f, conj in zip(sets, conj_slots):
            w = f.numeric_weights()
            ops.append(
                _Operand(
                    f.points,
                    form_h_array(f.points),
                    np.conj(w) if conj else w,
                    1,
                )
            )
    return ops, mode, acc


@dataclass
class _KeyCodec:
    """Packs (a2, a3, b) into one sortable integer key within an a1-slab."""

    lo2: int
    lo3: int
    lob: int
    w3: int
    wb: int
    wide: bool

    @classmethod
    def spanning(cls, pairs: Sequence[tuple[_Operand, _Operand]]) -> "_KeyCodec":
        lo2 = lo3 = lob = None
        hi2 = hi3 = hib = None
        for P, R in pairs:
            if P.n == 0 or R.n == 0:
                continue
            l2 = int(P.X[:, 1].min()) + int(R.X[:, 1].min())
            h2 = int(P.X[:, 1].max()) + int(R.X[:, 1].max())
            l3 = int(P.X[:, 2].min()) + int(R.X[:, 2].min())
            h3 = int(P.X[:, 2].max()) + int(R.X[:, 2].max())
            lb = int(P.h.min()) + int(R.h.min())
            hb = int(P.h.max()) + int(R.h.max())
            lo2 = l2 if lo2 is None else min(lo2, l2)
            hi2 = h2 if hi2 is None else max(hi2, h2)
            lo3 = l3 if lo3 is None else min(lo3, l3)
            hi3 = h3 if hi3 is None else max(hi3, h3)
            lob = lb if lob is None else min(lob, lb)
            hib = hb if hib is None else max(hib, hb)
        if lo2 is None:
            return cls(0, 0, 0, 1, 1, False)
        w2 = hi2 - lo2 + 1
        w3 = hi3 - lo3 + 1
        wb = hib - lob + 1
        wide = w2 * w3 * wb >= (1 << 63)
        return cls(lo2, lo3, lob, w3, wb, wide)

    def encode(self, a2: np.ndarray, a3: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.wide:
            a2 = a2.astype(object)
            a3 = a3.astype(object)
            b = b.astype(object)
        return ((a2 - self.lo2) * self.w3 + (a3 - self.lo3)) * self.wb + (
            b - self.lob
        )

    def decode(self, codes: np.ndarray) -> tuple[np.ndarray, ...]:
        c = codes.astype(object) if self.wide else codes
        b = c % self.wb + self.lob
        rest = c // self.wb
        a3 = rest % self.w3 + self.lo3
        a2 = rest // self.w3 + self.lo2
        return (
            np.asarray(a2, dtype=np.int64),
            np.asarray(a3, dtype=np.int64),
            np.asarray(b, dtype=np.int64),
        )


def _x1_groups(X: np.ndarray) -> dict[int, tuple[int, int]]:
    """Contiguous row ranges per first coordinate (rows are lex-sorted)."""
    if len(X) == 0:
        return {}
    values, starts, counts = np.unique(
        X[:, 0], return_index=True, return_counts=True
    )
    return {
        int(v): (int(s), int(s + c))
        for v, s, c in zip(values.tolist(), starts.tolist(), counts.tolist())
    }


@dataclass
class _PairSide:
    """Ordered pairs (xi, eta) with xi from P and eta from R."""

    P: _Operand
    R: _Operand
    gp: dict = field(init=False)
    gr: dict = field(init=False)

    def __post_init__(self) -> None:
        self.gp = _x1_groups(self.P.X)
        self.gr = _x1_groups(self.R.X)

    def slab_values(self) -> set[int]:
        return {s + t for s in self.gp for t in self.gr}


def _reduce(
    codes: np.ndarray, values: np.ndarray, counts: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sum values and counts of equal codes; output sorted by code."""
    if len(codes) == 0:
        return codes, values, counts
    order = np.argsort(codes, kind="stable")
    c = codes[order]
    change = np.not_equal(c[1:], c[:-1]).astype(bool)
    starts = np.flatnonzero(np.concatenate(([True], change)))
    return (
        c[starts],
        np.add.reduceat(values[order], starts),
        np.add.reduceat(counts[order], starts),
    )


def _slab_table(
    side: _PairSide, a1: int, codec: _KeyCodec, chunk: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced (codes, pair sums, pair counts) of one a1-slab."""
    P, R = side.P, side.R
    partial: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    pend_i: list[np.ndarray] = []
    pend_j: list[np.ndarray] = []
    pending = 0

    def flush() -> None:
        nonlocal pending
        if not pend_i:
            return
        i = np.concatenate(pend_i)
        j = np.concatenate(pend_j)
        codes = codec.encode(
            P.X[i, 1] + R.X[j, 1], P.X[i, 2] + R.X[j, 2], P.h[i] + R.h[j]
        )
        values = P.v[i] * R.v[j]
        partial.append(_reduce(codes, values, np.ones(len(i), dtype=np.int64)))
        pend_i.clear()
        pend_j.clear()
        pending = 0

    for s in sorted(side.gp):
        t = a1 - s
        if t not in side.gr:
            continue
        ps, pe = side.gp[s]
        rs, re = side.gr[t]
        nr = re - rs
        step = max(1, chunk // nr)
        for lo in range(ps, pe, step):
            hi = min(pe, lo + step)
            pend_i.append(np.repeat(np.arange(lo, hi), nr))
            pend_j.append(np.tile(np.arange(rs, re), hi - lo))
            pending += (hi - lo) * nr
            if pending >= chunk:
                flush()
    flush()
    if not partial:
        empty_codes = np.zeros(0, dtype=object if codec.wide else np.int64)
        return empty_codes, np.zeros(0, dtype=P.v.dtype), np.zeros(
            0, dtype=np.int64
        )
    if len(partial) == 1:
        return partial[0]
    return _reduce(
        np.concatenate([p[0] for p in partial]),
        np.concatenate([p[1] for p in partial]),
        np.concatenate([p[2] for p in partial]),
    )


def _py(x: Any) -> int | complex:
    """numpy scalar to a Python int (integer kinds) or complex."""
    if isinstance(x, (complex, np.complexfloating)):
        return complex(x)
    return int(x)


def _dot(a: np.ndarray, b: np.ndarray) -> int | complex:
    if len(a) == 0:
        return 0
    return _py(np.dot(a, b))


def _square_sum(s: np.ndarray, exact: bool) -> int | float:
    """sum |s|^2 without int64 overflow."""
    if not exact:
        return math.fsum(np.abs(s) ** 2)
    if len(s) == 0:
        return 0
    if s.dtype != object:
        big = int(np.abs(s).max())
        if big * big * len(s) >= INT64_SAFE:
            s = s.astype(object)
    return int(np.dot(s, s))


@dataclass
class SlabStats:
    bucket_count: int = 0
    max_bucket_size: int = 0
    resonant_pairs: int = 0

    def merge(self, other: "SlabStats") -> None:
        self.bucket_count += other.bucket_count
        self.max_bucket_size = max(self.max_bucket_size, other.max_bucket_size)
        self.resonant_pairs += other.resonant_pairs

    def to_dict(self) -> dict:
        return {
            "key_count": self.bucket_count,
            "max_bucket": self.max_bucket_size,
            "resonant_pairs": self.resonant_pairs,
        }


def _omega_slabs(
    side13: _PairSide,
    side24: _PairSide | None,
    codec: _KeyCodec,
    slabs: Sequence[int],
    chunk: int,
    exact: bool,
    budget: int,
) -> tuple[list[Any], SlabStats]:
    """Per-slab partial sums of P13 * P24 over common keys.

    side24 None means the (f2, f4) table is the conjugate of the (f1, f3)
    one, so each slab contributes sum |P13|^2. Stops after the first slab
    that takes the sum of m13 * m24 over the keys past `budget`.
    """
    parts: list[Any] = []
    stats = SlabStats()
    for a1 in slabs:
        c13, s13, k13 = _slab_table(side13, a1, codec, chunk)
        stats.bucket_count += len(c13)
        if len(k13):
            stats.max_bucket_size = max(stats.max_bucket_size, int(k13.max()))
        if side24 is None:
            stats.resonant_pairs += int(np.dot(k13, k13))
            square = _square_sum(s13, exact)
            parts.append(square if exact else complex(square))
        else:
            c24, s24, k24 = _slab_table(side24, a1, codec, chunk)
            if len(k24):
                stats.max_bucket_size = max(
                    stats.max_bucket_size, int(k24.max())
                )
            _, i13, i24 = np.intersect1d(
                c13, c24, assume_unique=True, return_indices=True
            )
            stats.resonant_pairs += int(np.dot(k13[i13], k24[i24]))
            value = _dot(s13[i13], s24[i24])
            parts.append(value if exact else complex(value))
            logging.debug(
                "slab a1=%d: %d keys, %d common", a1, len(c13), len(i13)
            )
        if stats.resonant_pairs > budget:
            break
    return parts, stats


def _omega_slabs_worker(args: tuple) -> tuple[list[Any], SlabStats]:
    """Top-level (picklable) entry point for slab ranges in worker processes."""
    side13, side24, codec, slabs, chunk, exact, budget = args
    return _omega_slabs(side13, side24, codec, slabs, chunk, exact, budget)


def _sum_parts(parts: Sequence[Any], exact: bool) -> Any:
    if exact:
        return sum(int(p) for p in parts)
    return complex(
        math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts)
    )


def _check_budget(
    work: int, budget: int, stats: dict, what: str = "Estimated work"
) -> None:
    if work > budget:
        raise BudgetExceededError(f"{what} {work} exceeds budget {budget}", stats)


def _total_scaled(
    ops: Sequence[_Operand],
    same: bool,
    exact: bool,
    jobs: int,
    chunk: int,
    budget: int,
) -> tuple[Any, SlabStats]:
    """Sum over keys of P13 * P24 in scaled units (ints or complex).

    Raises BudgetExceededError once the sum of m13 * m24 over the (a, b)
    keys, the number of resonant quadruples, passes `budget`.
    """
    o1, o2, o3, o4 = ops
    side13 = _PairSide(o1, o3)
    side24 = None if same else _PairSide(o2, o4)
    codec = _KeyCodec.spanning(
        [(o1, o3)] if same else [(o1, o3), (o2, o4)]
    )
    slabs = side13.slab_values()
    if side24 is not None:
        slabs &= side24.slab_values()
    slabs_sorted = sorted(slabs)
    jobs = max(1, min(jobs, len(slabs_sorted)))
    if jobs == 1:
        parts, stats = _omega_slabs(
            side13, side24, codec, slabs_sorted, chunk, exact, budget
        )
        _check_budget(
            stats.resonant_pairs, budget, stats.to_dict(), "Resonant pair count"
        )
        return _sum_parts(parts, exact), stats

    logging.info("Dispatching %d slabs across %d workers", len(slabs_sorted), jobs)
    ranges = [list(r) for r in np.array_split(np.array(slabs_sorted), jobs)]
    ranges = [[int(a) for a in r] for r in ranges if len(r)]
    ctx = mp.get_context("spawn")
    stats = SlabStats()
    parts: list[Any] = []
    with ProcessPoolExecutor(
        max_workers=jobs,
        mp_context=ctx,
        initializer=init_kernel_worker,
        initargs=kernel_worker_logging(),
    ) as ex:
        results = ex.map(
            _omega_slabs_worker,
            [(side13, side24, codec, r, chunk, exact, budget) for r in ranges],
        )
        # map preserves submission order, so the reduction order is fixed
        for sub_parts, sub_stats in results:
            parts.extend(sub_parts)
            stats.merge(sub_stats)
    _check_budget(
        stats.resonant_pairs, budget, stats.to_dict(), "Resonant pair count"
    )
    return _sum_parts(parts, exact), stats


def _scale_back(total: Any, ops: Sequence[_Operand], exact: bool) -> Any:
    if exact:
        return Fraction(int(total), math.prod(op.denom for op in ops))
    return complex(total)


def omega_total(
    f1: WeightedSet,
    f2: WeightedSet,
    f3: WeightedSet,
    f4: WeightedSet,
    budget: int | None = None,
    jobs: int = 1,
    chunk: int = PAIR_CHUNK,
) -> tuple[Fraction | complex, SlabStats]:
    """Omega only (no Omega1/Omega2 split), via the a1-slab bucketing."""
    budget = work_budget() if budget is None else budget
    ops, mode, _ = _operands((f1, f2, f3, f4), (False, True, False, True))
    exact = mode == WeightMode.EXACT
    same = f1 == f2 and f3 == f4
    total, stats = _total_scaled(ops, same, exact, jobs, chunk, budget)
    return _scale_back(total, ops, exact), stats


# Omega2


def _cone_rows(diffs: np.ndarray) -> np.ndarray:
    keep = form_h_array(diffs) == 0
    if not keep.any():
        return np.zeros((0, 3), dtype=np.int64)
    return np.unique(diffs[keep], axis=0)


def cone_differences(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Rows d = x - y on the cone (origin included), sorted and distinct.

    Small inputs take all differences; larger ones enumerate the cone inside
    the difference box from the primitive catalogue and its multiples.
    """
    if len(X) == 0 or len(Y) == 0:
        return np.zeros((0, 3), dtype=np.int64)
    if len(X) * len(Y) <= DIFF_DIRECT_LIMIT:
        diffs = (X[:, None, :] - Y[None, :, :]).reshape(-1, 3)
        return _cone_rows(diffs)
    lo = X.min(axis=0) - Y.max(axis=0)
    hi = X.max(axis=0) - Y.min(axis=0)
    radius = int(max(np.abs(lo).max(), np.abs(hi).max()))
    catalog = enumerate_cone_irr(math.isqrt(3 * radius * radius) + 1)
    rows: list[np.ndarray] = []
    if np.all(lo <= 0) and np.all(hi >= 0):
        rows.append(np.zeros((1, 3), dtype=np.int64))
    prim = catalog.as_array()
    if len(prim):
        top = radius // np.abs(prim).max(axis=1)
        for k in range(1, int(top.max()) + 1):
            mult = prim[top >= k] * k
            inside = np.all((mult >= lo) & (mult <= hi), axis=1)
            rows.append(mult[inside])
    out = np.concatenate(rows) if rows else np.zeros((0, 3), dtype=np.int64)
    return np.unique(out, axis=0) if len(out) else out


def _ext(op: _Operand) -> np.ndarray:
    """Weights with a trailing zero so index -1 reads as absent."""
    return np.append(op.v, np.zeros(1, dtype=op.v.dtype))


def _lookup(f: WeightedSet, query: np.ndarray) -> np.ndarray:
    return f.index_of(query)


def _group_sum(keys: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if len(keys) == 0:
        return keys, values
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    starts = np.flatnonzero(np.concatenate(([True], k[1:] != k[:-1])))
    return k[starts], np.add.reduceat(values[order], starts)


def _family_sum(
    fa: WeightedSet,
    fb: WeightedSet,
    fc: WeightedSet,
    fd: WeightedSet,
    oa: _Operand,
    ob: _Operand,
    oc: _Operand,
    od: _Operand,
    diffs: np.ndarray,
    zero: Any,
) -> Any:
    """Sum over d in diffs and x in supp(fa) of

        va(x) vb(x - d) T_d(d . A x),  T_d(c) = sum_{y: d.Ay = c} vd(y) vc(y - d).

    For the (1,2) family (fa, fb, fc, fd) = (f1, f2, f3, f4); for the (1,4)
    family it is (f1, f4, f3, f2).
    """
    vb = _ext(ob)
    vc = _ext(oc)
    total = zero
    for d in diffs:
        ad = d * np.array([1, -1, -1], dtype=np.int64)
        ib = _lookup(fb, oa.X - d)
        mask_a = ib >= 0
        if not mask_a.any():
            continue
        ic = _lookup(fc, od.X - d)
        mask_d = ic >= 0
        if not mask_d.any():
            continue
        t_keys, t_vals = _group_sum(
            od.X[mask_d] @ ad, od.v[mask_d] * vc[ic[mask_d]]
        )
        xa = oa.X[mask_a]
        qa = oa.v[mask_a] * vb[ib[mask_a]]
        ca = xa @ ad
        pos = np.searchsorted(t_keys, ca)
        pos = np.minimum(pos, len(t_keys) - 1)
        hit = t_keys[pos] == ca
        if hit.any():
            total = total + _dot(qa[hit], t_vals[pos[hit]])
    return total


def _direction_groups(rows: np.ndarray) -> dict[tuple[int, ...], list[np.ndarray]]:
    groups: dict[tuple[int, ...], list[np.ndarray]] = {}
    for r in rows:
        t = tuple(int(x) for x in r)
        if not any(t):
            continue
        groups.setdefault(canonical_sign(primitive(t)), []).append(r)
    return groups


def _overlap_sum(
    f2: WeightedSet,
    f3: WeightedSet,
    f4: WeightedSet,
    o1: _Operand,
    o2: _Operand,
    o3: _Operand,
    o4: _Operand,
    d12: np.ndarray,
    d14: np.ndarray,
    zero: Any,
) -> tuple[Any, int]:
    """Quadruples with both xi1 - xi2 = d and xi1 - xi4 = e on the cone.

    d . A e = 0 for two cone vectors forces d = 0, e = 0 or d parallel to e
    (the form has no isotropic plane), so only those pairs are visited.
    """
    pairs: list[tuple[np.ndarray, np.ndarray]] = []
    zero_row = np.zeros(3, dtype=np.int64)
    d_has_zero = any(not r.any() for r in d12)
    e_has_zero = any(not r.any() for r in d14)
    if d_has_zero:
        pairs.extend((zero_row, e) for e in d14)
    if e_has_zero:
        pairs.extend((d, zero_row) for d in d12 if d.any())
    g12 = _direction_groups(d12)
    g14 = _direction_groups(d14)
    for key in sorted(g12.keys() & g14.keys()):
        for d in g12[key]:
            pairs.extend((d, e) for e in g14[key])

    v2, v3, v4 = _ext(o2), _ext(o3), _ext(o4)
    total = zero
    for d, e in pairs:
        i2 = _lookup(f2, o1.X - d)
        m = i2 >= 0
        if not m.any():
            continue
        x1 = o1.X[m]
        i4 = _lookup(f4, x1 - e)
        m4 = i4 >= 0
        if not m4.any():
            continue
        i3 = _lookup(f3, x1[m4] - d - e)
        m3 = i3 >= 0
        if not m3.any():
            continue
        w = (
            o1.v[m][m4][m3]
            * v2[i2[m][m4][m3]]
            * v4[i4[m4][m3]]
            * v3[i3[m3]]
        )
        total = total + _py(w.sum())
    return total, len(pairs)


def _omega2_scaled(
    sets: Sequence[WeightedSet],
    ops: Sequence[_Operand],
    zero: Any,
    budget: int,
) -> tuple[Any, int]:
    f1, f2, f3, f4 = sets
    o1, o2, o3, o4 = ops
    d12 = cone_differences(o1.X, o2.X)
    d14 = cone_differences(o1.X, o4.X)
    work = (len(d12) + len(d14)) * (o1.n + max(o2.n, o4.n))
    _check_budget(
        work,
        budget,
        {"cone_differences_12": len(d12), "cone_differences_14": len(d14)},
    )
    logging.debug(
        "Omega2: %d (1,2) and %d (1,4) cone differences", len(d12), len(d14)
    )
    fam12 = _family_sum(f1, f2, f3, f4, o1, o2, o3, o4, d12, zero)
    fam14 = _family_sum(f1, f4, f3, f2, o1, o4, o3, o2, d14, zero)
    both, _ = _overlap_sum(f2, f3, f4, o1, o2, o3, o4, d12, d14, zero)
    return fam12 + fam14 - both, len(d12) + len(d14)


def omega_bucketed(
    f1: WeightedSet,
    f2: WeightedSet,
    f3: WeightedSet,
    f4: WeightedSet,
    budget: int | None = None,
    jobs: int = 1,
    chunk: int = PAIR_CHUNK,
) -> ResonanceReport:
    """Omega via (a, b) buckets, Omega2 per cone difference, Omega1 = rest."""
    start = time.perf_counter()
    budget = work_budget() if budget is None else budget
    sets = (f1, f2, f3, f4)
    pairs = len(f1) * len(f3) + len(f2) * len(f4)
    ops, mode, acc = _operands(sets, (False, True, False, True))
    exact = mode == WeightMode.EXACT
    same = f1 == f2 and f3 == f4
    total, stats = _total_scaled(ops, same, exact, jobs, chunk, budget)
    zero = 0 if exact else 0j
    omega2_raw, n_diffs = _omega2_scaled(sets, ops, zero, budget)
    omega = _scale_back(total, ops, exact)
    omega2 = _scale_back(omega2_raw, ops, exact)
    report = ResonanceReport(
        omega=omega,
        omega1=omega - omega2,
        omega2=omega2,
        mode=mode,
        method=Method.BUCKETED,
        bucket_count=stats.bucket_count,
        max_bucket_size=stats.max_bucket_size,
        pair_count=pairs,
        resonant_pairs=stats.resonant_pairs,
        cone_differences=n_diffs,
        timing=time.perf_counter() - start,
    )
    logging.debug("omega_bucketed: %s", report.to_dict())
    return report


def omega_of(f: WeightedSet, **kwargs: Any) -> ResonanceReport:
    """Omega(f, f, f, f)."""
    return omega_bucketed(f, f, f, f, **kwargs)


# Bucket tables


@dataclass
class BucketTable:
    """Pair sums G(a, b) over the keys hit by ordered pairs (xi, eta).

    keys rows are (a1, a2, a3, b); sums are integer numerators over
    ``denominator`` in exact mode and complex values otherwise.
    """

    keys: np.ndarray
    sums: np.ndarray
    counts: np.ndarray
    denominator: int
    mode: WeightMode
    pairs: list[list[tuple[int, int]]] | None = None

    def __len__(self) -> int:
        return len(self.keys)

    def total_pairs(self) -> int:
        return int(self.counts.sum()) if len(self.counts) else 0

    def value(self, i: int) -> Fraction | complex:
        if self.mode == WeightMode.EXACT:
            return Fraction(int(self.sums[i]), self.denominator)
        return complex(self.sums[i])

    def key_tuples(self) -> list[tuple[int, int, int, int]]:
        return [tuple(int(x) for x in row) for row in self.keys.tolist()]


def build_bucket_table(
    g1: WeightedSet, g2: WeightedSet, keep_pairs: bool = False
) -> BucketTable:
    """Materialise the full (a, b) table of the ordered pairs of g1 x g2."""
    n_pairs = len(g1) * len(g2)
    if n_pairs > BUCKET_TABLE_MAX_PAIRS:
        raise BudgetExceededError(
            "Bucket table too large to materialise",
            {"pair_count": n_pairs, "limit": BUCKET_TABLE_MAX_PAIRS},
        )
    ops, mode, _ = _operands((g1, g2), (False, False))
    o1, o2 = ops
    if n_pairs == 0:
        return BucketTable(
            np.zeros((0, 4), dtype=np.int64),
            np.zeros(0, dtype=o1.v.dtype),
            np.zeros(0, dtype=np.int64),
            o1.denom * o2.denom,
            mode,
            [] if keep_pairs else None,
        )
    i = np.repeat(np.arange(o1.n), o2.n)
    j = np.tile(np.arange(o2.n), o1.n)
    rows = np.stack(
        [
            o1.X[i, 0] + o2.X[j, 0],
            o1.X[i, 1] + o2.X[j, 1],
            o1.X[i, 2] + o2.X[j, 2],
            o1.h[i] + o2.h[j],
        ],
        axis=1,
    )
    keys, inverse = np.unique(rows, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    values = o1.v[i] * o2.v[j]
    order = np.argsort(inverse, kind="stable")
    starts = np.flatnonzero(
        np.concatenate(([True], inverse[order][1:] != inverse[order][:-1]))
    )
    sums = np.add.reduceat(values[order], starts)
    counts = np.bincount(inverse, minlength=len(keys)).astype(np.int64)
    pairs = None
    if keep_pairs:
        pairs = [[] for _ in range(len(keys))]
        for a, b, k in zip(i.tolist(), j.tolist(), inverse.tolist()):
            pairs[k].append((a, b))
    return BucketTable(keys, sums, counts, o1.denom * o2.denom, mode, pairs)


def bilinear_l2(g1: WeightedSet, g2: WeightedSet) -> Fraction | float:
    """Squared L^2 norm over [0,1] x T^3 of the product of the two evolutions.

    Equals sum over (a, b) of |G(a, b)|^2 with G the (g1, g2) pair sum.
    """
    ops, mode, _ = _operands((g1, g2), (False, False))
    o1, o2 = ops
    exact = mode == WeightMode.EXACT
    side = _PairSide(o1, o2)
    codec = _KeyCodec.spanning([(o1, o2)])
    parts: list[Any] = []
    for a1 in sorted(side.slab_values()):
        _, sums, _ = _slab_table(side, a1, codec, PAIR_CHUNK)
        parts.append(_square_sum(sums, exact))
    if exact:
        return Fraction(sum(parts), (o1.denom * o2.denom) ** 2)
    return math.fsum(parts)


# Slices, heavy planes, restricted Omega1


def slice_A(a: LatticePoint, b: int, N: int) -> list[LatticePoint]:
    """{xi in [-N,N]^3 : h(xi) + h(a - xi) = b}, sorted."""
    if N < 0 or N > SLICE_MAX_N:
        raise BoundError(f"slice_A scan needs 0 <= N <= {SLICE_MAX_N}, got {N}")
    r = np.arange(-N, N + 1, dtype=np.int64)
    x2 = np.repeat(r, len(r))
    x3 = np.tile(r, len(r))
    out: list[LatticePoint] = []
    for x1 in range(-N, N + 1):
        y1 = a.x1 - x1
        y2 = a.x2 - x2
        y3 = a.x3 - x3
        lhs = (x1 * x1 - x2 * x2 - x3 * x3) + (y1 * y1 - y2 * y2 - y3 * y3)
        hit = lhs == b
        out.extend(
            LatticePoint(x1, int(p), int(q))
            for p, q in zip(x2[hit].tolist(), x3[hit].tolist())
        )
    return out


def _mass_scaled(f: WeightedSet) -> tuple[np.ndarray, Any]:
    """Squared weights in comparable units and their total."""
    if f.is_exact:
        nums, _ = f.integer_weights()
        sq = [int(x) * int(x) for x in nums.tolist()]
        dtype = np.int64 if sum(sq) < INT64_SAFE else object
        arr = np.array(sq, dtype=dtype).reshape(-1)
        return arr, sum(sq)
    sq = np.abs(f.numeric_weights()) ** 2
    return sq, math.fsum(sq)


def heavy_planes(f: WeightedSet, M: int) -> list[Plane]:
    """Planes with normal in Cone^irr_M carrying >= M^-2 of the squared mass."""
    if not f.is_nonnegative():
        raise BoundError("heavy_planes requires nonnegative weights")
    if len(f) == 0:
        return []
    normals = enumerate_cone_irr(M).normals()
    mass, total = _mass_scaled(f)
    planes: list[Plane] = []
    for n in normals:
        offsets = f.points @ np.array(n.as_tuple(), dtype=np.int64)
        keys, sums = _group_sum(offsets, mass)
        for c, m in zip(keys.tolist(), sums.tolist()):
            if M * M * m >= total:
                planes.append(Plane(n, int(c)))
    planes.sort()
    logging.debug(
        "heavy_planes(M=%d): %d planes over %d normals",
        M,
        len(planes),
        len(normals),
    )
    return planes


def on_any_plane(points: np.ndarray, planes: Sequence[Plane]) -> np.ndarray:
    mask = np.zeros(len(points), dtype=bool)
    by_normal: dict[LatticePoint, list[int]] = {}
    for p in planes:
        by_normal.setdefault(p.normal, []).append(p.offset)
    for n, offsets in by_normal.items():
        vals = points @ np.array(n.as_tuple(), dtype=np.int64)
        mask |= np.isin(vals, np.array(offsets, dtype=np.int64))
    return mask


def error_part(f: WeightedSet, M: int) -> WeightedSet:
    """f restricted to the points lying on none of its heavy planes."""
    planes = heavy_planes(f, M)
    return f.restrict(~on_any_plane(f.points, planes))


@dataclass
class LinePointBound:
    direction: LatticePoint
    max_count: int
    bound: float
    holds: bool


def line_point_bound(xi: LatticePoint, S: WeightedSet) -> LinePointBound:
    """Check #(l cap S) <= gcd(xi)/|xi| diam(S) + 1 on every line of direction xi.

    Exact: (m - 1)^2 |xi|^2 <= gcd(xi)^2 diam(S)^2.
    """
    if xi.is_zero():
        raise BoundError("Line direction must be nonzero")
    if len(S) == 0:
        return LinePointBound(xi, 0, 1.0, True)
    v = np.array(xi.as_tuple(), dtype=np.int64)
    inv = np.cross(S.points, v)
    _, counts = np.unique(inv, axis=0, return_counts=True)
    m = int(counts.max())
    g = gcd_point(xi)
    diam_sq = S.diam_sq()
    holds = (m - 1) ** 2 * xi.norm_sq() <= g * g * diam_sq
    bound = g / math.sqrt(xi.norm_sq()) * math.sqrt(diam_sq) + 1
    return LinePointBound(xi, m, bound, holds)


def _rank(vectors: Sequence[LatticePoint]) -> int:
    vs = [v.as_tuple() for v in vectors if not v.is_zero()]
    if not vs:
        return 0
    for i in range(len(vs)):
        for j in range(i + 1, len(vs)):
            c = LatticePoint(*vs[i]).cross(LatticePoint(*vs[j]))
            if any(c):
                for k in range(len(vs)):
                    w = vs[k]
                    if c[0] * w[0] + c[1] * w[1] + c[2] * w[2]:
                        return 3
                return 2
    return 1


@dataclass
class PlaneRestrictedReport:
    """Omega1 on four plane-restricted supports and its case structure."""

    value: Fraction | complex
    ratio: float
    bound: float
    M: int
    N: int
    normal_rank: int
    all_planes_equal: bool
    line_case_keys: int
    curve_case_keys: int
    nondegenerate_crossings: bool
    oracle_checked: bool = False

    def to_dict(self) -> dict:
        return {
            "omega1": to_jsonable(self.value),
            "ratio": self.ratio,
            "bound": self.bound,
            "M": self.M,
            "N": self.N,
            "normal_rank": self.normal_rank,
            "all_planes_equal": self.all_planes_equal,
            "line_case_keys": self.line_case_keys,
            "curve_case_keys": self.curve_case_keys,
            "nondegenerate_crossings": self.nondegenerate_crossings,
        }


def omega1_plane_restricted(
    fs: Sequence[WeightedSet],
    planes: Sequence[Plane],
    budget: int | None = None,
) -> PlaneRestrictedReport:
    """Omega1(f1..f4) for supports on cone-normal planes H1..H4."""
    if len(fs) != 4 or len(planes) != 4:
        raise ValueError("Expected four functions and four planes")
    for idx, (f, H) in enumerate(zip(fs, planes), 1):
        if form_h(H.normal) != 0:
            raise BoundError(f"Plane H{idx} normal {H.normal} is not on the cone")
        if len(f) and not np.all(H.values(f.points) == H.offset):
            raise ContainmentError(f"supp(f{idx}) is not contained in H{idx}")

    report = omega_bucketed(*fs, budget=budget)
    M = max(math.isqrt(H.normal.norm_sq() - 1) + 1 for H in planes)
    N = max(1, max(f.max_abs_coord() for f in fs))
    norms = math.prod(f.l2_norm() for f in fs)
    bound = M * M * math.sqrt(N) * (M * M + N**0.25) * norms
    value = report.omega1
    ratio = abs(complex(value)) / bound if bound > 0 else 0.0

    line_keys = curve_keys = 0
    f1, f2, f3, f4 = fs
    if len(f1) * len(f3) <= BUCKET_TABLE_MAX_PAIRS and len(f2) * len(
        f4
    ) <= BUCKET_TABLE_MAX_PAIRS:
        t13 = build_bucket_table(f1, f3)
        t24 = build_bucket_table(f2, f4)
        common = set(t13.key_tuples()) & set(t24.key_tuples())
        n1 = planes[0].normal
        for key in common:
            a = LatticePoint(key[0], key[1], key[2])
            if n1.dot(a) == 2 * planes[0].offset:
                line_keys += 1
            else:
                curve_keys += 1

    distinct = sorted({H.normal for H in planes})
    nondeg = all(
        n.apply_a().dot(m) != 0
        for i, n in enumerate(distinct)
        for m in distinct[i + 1 :]
    )
    return PlaneRestrictedReport(
        value=value,
        ratio=ratio,
        bound=bound,
        M=M,
        N=N,
        normal_rank=_rank([H.normal for H in planes]),
        all_planes_equal=len(set(planes)) == 1,
        line_case_keys=line_keys,
        curve_case_keys=curve_keys,
        nondegenerate_crossings=nondeg,
    )
