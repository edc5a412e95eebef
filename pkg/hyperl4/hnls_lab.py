"""
Fourier-side tools for the hyperbolic NLS  i u_t + box u = +-|u|^(2k) u.

Sobolev norms of coefficient data, the ill-posedness family
phi_N = sum_{k<=N} e^{2 pi i (k,k,0).x} / k with its exact cubic term and
first Picard ratio, and a Strang split-step integrator on a periodic grid.
Time uses the same 2 pi convention as strichartz_lab: one period is [0, 1].
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np

from hyperl4.errors import BoundError, BudgetExceededError, StabilityError
from hyperl4.lattice_core import COORD_BOUND
from hyperl4.resonance_count import work_budget
from hyperl4.weighted_set import (
    CODE_OFFSET,
    CODE_RADIX,
    WeightedSet,
    WeightMode,
    encode_points,
)

ILLPOSED_MAX_N = 10**6
PICARD_MAX_N = 10**5
DIRECT_CONVOLVE_MAX_N = 1 << 12
CONVOLUTION_CHUNK = 1 << 22
CONVOLUTION_MAX_COORD = COORD_BOUND // 4


def hs_norm(f: WeightedSet, s: float) -> float:
    """(sum <k>^(2s) |f(k)|^2)^(1/2) with <k> = sqrt(1 + |k|^2)."""
    if len(f) == 0:
        return 0.0
    pts = f.points.astype(np.float64)
    bracket = 1.0 + np.sum(pts * pts, axis=1)
    terms = bracket**s * f.abs_weights() ** 2
    return math.sqrt(math.fsum(terms.tolist()))


def illposed_data(N: int) -> WeightedSet:
    """Coefficients 1/k at (k, k, 0), 1 <= k <= N."""
    if not 1 <= N <= ILLPOSED_MAX_N:
        raise BoundError(f"illposed_data needs 1 <= N <= {ILLPOSED_MAX_N}")
    k = np.arange(1, N + 1, dtype=np.int64)
    pts = np.stack([k, k, np.zeros_like(k)], axis=1)
    return WeightedSet(pts, [Fraction(1, int(x)) for x in k.tolist()], WeightMode.EXACT)


def illposed_hs_norm_sq(N: int, s: float = 0.5) -> float:
    """||phi_N||^2_{H^s} = sum_k (1 + 2k^2)^s / k^2, summed without building phi_N."""
    k = np.arange(1, N + 1, dtype=np.float64)
    return math.fsum(((1 + 2 * k * k) ** s / (k * k)).tolist())


# Cubic term


def cubic_convolution(f: WeightedSet, budget: int | None = None) -> WeightedSet:
    """Coefficients of |u|^2 u: c(k) = sum_{k1-k2+k3=k} f(k1) f(k2)* f(k3).

    The pair sums P(a) = sum_{k1+k3=a} f(k1) f(k3) are formed once; the output
    is then P(a) f(k2)* accumulated at a - k2.
    """
    n = len(f)
    if n == 0:
        return WeightedSet.empty(f.mode)
    budget = work_budget() if budget is None else budget
    if n**3 > budget:
        raise BudgetExceededError("cubic_convolution over budget", {"terms": n**3})
    if f.max_abs_coord() > CONVOLUTION_MAX_COORD:
        raise BoundError("cubic_convolution needs coordinates within 2^18")
    exact = f.is_exact
    if exact:
        nums, denom = f.integer_weights()
        big = int(max(nums.tolist()))
        dtype = np.int64 if big**3 * n**3 < (1 << 62) else object
        v = nums.astype(dtype)
        vc = v
    else:
        v = f.numeric_weights()
        vc = np.conj(v)
    X = f.points
    i = np.repeat(np.arange(n), n)
    j = np.tile(np.arange(n), n)
    sums_ij = X[i] + X[j]
    _, first, inverse = np.unique(
        encode_points(sums_ij), return_index=True, return_inverse=True
    )
    P = np.zeros(len(first), dtype=v.dtype)
    np.add.at(P, inverse.reshape(-1), v[i] * v[j])
    A = sums_ij[first]
    out_codes, out_vals = [], []
    step = max(1, CONVOLUTION_CHUNK // max(len(A), 1))
    for start in range(0, n, step):
        k2 = np.arange(start, min(start + step, n))
        rows = (A[None, :, :] - X[k2][:, None, :]).reshape(-1, 3)
        vals = (P[None, :] * vc[k2][:, None]).reshape(-1)
        out_codes.append(encode_points(rows))
        out_vals.append(vals)
    codes = np.concatenate(out_codes)
    vals = np.concatenate(out_vals)
    ukeys, inv = np.unique(codes, return_inverse=True)
    sums = np.zeros(len(ukeys), dtype=vals.dtype)
    np.add.at(sums, inv.reshape(-1), vals)
    pts = _decode(ukeys)
    if exact:
        d3 = denom**3
        weights = [Fraction(int(s), d3) for s in sums.tolist()]
        return WeightedSet(pts, weights, WeightMode.EXACT)
    return WeightedSet(pts, sums, WeightMode.NUMERIC)


def _decode(codes: np.ndarray) -> np.ndarray:
    radix = np.uint64(CODE_RADIX)
    x3 = codes % radix
    rest = codes // radix
    x2 = rest % radix
    x1 = rest // radix
    out = np.stack([x1, x2, x3], axis=1).astype(np.int64)
    return out - CODE_OFFSET


def cubic_convolution_oracle(
    f: WeightedSet,
) -> dict[tuple[int, int, int], complex | Fraction]:
    """Direct triple loop."""
    items = [(p.as_tuple(), w) for p, w in f.items()]
    out: dict[tuple[int, int, int], complex | Fraction] = {}
    for p1, w1 in items:
        for p2, w2 in items:
            conj2 = w2 if isinstance(w2, Fraction) else complex(w2).conjugate()
            for p3, w3 in items:
                key = tuple(a - b + c for a, b, c in zip(p1, p2, p3))
                out[key] = out.get(key, 0) + w1 * conj2 * w3
    return {k: v for k, v in out.items() if v != 0}


def illposed_cubic_coefficients(N: int) -> tuple[np.ndarray, np.ndarray]:
    """(k, c(k)) for the cubic term of phi_N along the line (k, k, 0).

    c(k) = sum_{k1 - k2 + k3 = k} 1/(k1 k2 k3), k in [2 - N, 2N - 1].
    """
    if not 1 <= N <= PICARD_MAX_N:
        raise BoundError(f"Need 1 <= N <= {PICARD_MAX_N}")
    a = 1.0 / np.arange(1, N + 1, dtype=np.float64)
    if N <= DIRECT_CONVOLVE_MAX_N:
        c = np.convolve(np.convolve(a, a), a[::-1])
    else:
        size = 1 << (3 * N).bit_length()
        fa = np.fft.rfft(a, size)
        fr = np.fft.rfft(a[::-1], size)
        c = np.fft.irfft(fa * fa * fr, size)[: 3 * N - 2]
    # index 0 of c is k1 + k3 - k2 = 1 + 1 - N
    ks = np.arange(2 - N, 2 - N + len(c), dtype=np.int64)
    return ks, c


def picard_ratio(N: int) -> float:
    """|| |phi_N|^2 phi_N ||_{H^1/2} / ||phi_N||^3_{H^1/2}."""
    ks, c = illposed_cubic_coefficients(N)
    kf = ks.astype(np.float64)
    top = math.sqrt(math.fsum((np.sqrt(1 + 2 * kf * kf) * c * c).tolist()))
    base = math.sqrt(illposed_hs_norm_sq(N))
    return top / base**3


def gamma_lower_sum(k: int, N: int | None = None) -> float:
    """sum of 1/(k1 k2 k3) over k1, k2 <= k/4, k3 = k - k1 + k2 (k3 <= N)."""
    if k < 4:
        return 0.0
    m = k // 4
    k1 = np.arange(1, m + 1, dtype=np.float64)[:, None]
    k2 = np.arange(1, m + 1, dtype=np.float64)[None, :]
    k3 = k - k1 + k2
    terms = 1.0 / (k1 * k2 * k3)
    if N is not None:
        terms = np.where(k3 <= N, terms, 0.0)
    return math.fsum(terms.ravel().tolist())


@dataclass(frozen=True)
class CriticalRegularity:
    k: int
    s_c: float
    threshold: float
    inclusive: bool

    def describe(self) -> str:
        op = ">=" if self.inclusive else ">"
        return f"s {op} {self.threshold:g}"

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "s_c": self.s_c,
            "threshold": self.threshold,
            "condition": self.describe(),
        }


def critical_regularity(k: int) -> CriticalRegularity:
    """s_c = 3/2 - 1/k; well-posed for s > 1/2 at k = 1, s >= s_c for k >= 2."""
    if k < 1:
        raise BoundError(f"k must be >= 1, got {k}")
    s_c = 1.5 - 1.0 / k
    if k == 1:
        return CriticalRegularity(k, s_c, 0.5, False)
    return CriticalRegularity(k, s_c, s_c, True)


# Split-step integration


@dataclass(frozen=True)
class SpectralState:
    """Numeric Fourier coefficients truncated to the box [-box, box]^3.

    The split-step grid is dealiased by truncation only. Its padding keeps
    products of degree k + 1 off the box, but higher products of the
    nonlinear step can fold back onto box modes. Modes outside the box are
    dropped after every step.
    """

    coefficients: WeightedSet
    box: int
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.box < 1:
            raise BoundError("box must be >= 1")
        if self.coefficients.max_abs_coord() > self.box:
            raise BoundError(f"Coefficients leave the box [-{self.box},{self.box}]^3")
        if self.coefficients.is_exact:
            object.__setattr__(self, "coefficients", self.coefficients.to_numeric())

    @classmethod
    def from_weighted(cls, f: WeightedSet, box: int | None = None) -> "SpectralState":
        return cls(f, box if box is not None else max(1, f.max_abs_coord()))

    def mass(self) -> float:
        return float(self.coefficients.l2_norm_sq())

    def dense(self) -> np.ndarray:
        K = self.box
        out = np.zeros((2 * K + 1,) * 3, dtype=np.complex128)
        idx = self.coefficients.points + K
        out[idx[:, 0], idx[:, 1], idx[:, 2]] = self.coefficients.numeric_weights()
        return out

    @classmethod
    def from_dense(cls, coeffs: np.ndarray, box: int, time: float) -> "SpectralState":
        r = np.arange(-box, box + 1, dtype=np.int64)
        pts = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
        return cls(WeightedSet(pts, coeffs.reshape(-1), WeightMode.NUMERIC), box, time)


def _box_symbol(K: int) -> np.ndarray:
    r = np.arange(-K, K + 1, dtype=np.float64)
    x1, x2, x3 = np.meshgrid(r, r, r, indexing="ij")
    return x1 * x1 - x2 * x2 - x3 * x3


def default_grid(box: int, k: int) -> int:
    """Smallest power of two with at least (k + 2) box + 1 points.

    This is the truncation padding. It does not hold the full support of
    the degree 2k + 1 product, which would need (2k + 2) box + 1 points.
    """
    need = (k + 2) * box + 1
    return 1 << (need - 1).bit_length()


def _check_step(box: int, k: int, dt: float, grid: int) -> None:
    if grid & (grid - 1):
        raise StabilityError(f"Grid size {grid} is not a power of two")
    if grid < (k + 2) * box + 1:
        need = (k + 2) * box + 1
        raise StabilityError(
            f"Grid {grid} is below the truncation padding {need} at box {box}"
        )
    if dt <= 0 or dt * 2 * box * box > 0.5:
        raise StabilityError(f"dt={dt} violates dt * max|h| <= 0.5 at box {box}")


def _stepper(
    state: SpectralState,
    k: int,
    sign: int,
    dt: float,
    grid: int,
    nonlinear: bool,
) -> Iterator[np.ndarray]:
    """Yield the box coefficients after each Strang step."""
    K = state.box
    half = np.exp(2j * np.pi * (dt / 2) * _box_symbol(K))
    coeffs = state.dense()
    idx = np.arange(-K, K + 1) % grid
    size = grid**3
    while True:
        coeffs = coeffs * half
        if nonlinear:
            full = np.zeros((grid,) * 3, dtype=np.complex128)
            full[np.ix_(idx, idx, idx)] = coeffs
            u = np.fft.ifftn(full) * size
            u = u * np.exp(-2j * np.pi * sign * dt * np.abs(u) ** (2 * k))
            coeffs = (np.fft.fftn(u) / size)[np.ix_(idx, idx, idx)]
        coeffs = coeffs * half
        yield coeffs


def _validate(
    state: SpectralState, k: int, sign: int, dt: float, grid: int | None
) -> int:
    if k < 1:
        raise BoundError(f"k must be >= 1, got {k}")
    if sign not in (1, -1):
        raise BoundError(f"sign must be +1 or -1, got {sign}")
    grid = default_grid(state.box, k) if grid is None else grid
    _check_step(state.box, k, dt, grid)
    return grid


def splitstep_evolve(
    state: SpectralState,
    k: int = 1,
    sign: int = 1,
    dt: float = 1e-3,
    steps: int = 1,
    grid: int | None = None,
    nonlinear: bool = True,
) -> SpectralState:
    """Advance i u_t + box u = sign |u|^(2k) u by Strang splitting.

    Linear half steps multiply mode xi by exp(2 pi i (dt/2) h(xi)); the
    nonlinear step is the exact pointwise phase u exp(-2 pi i sign dt |u|^2k)
    on a grid of `grid`^3 points, after which modes outside the box are
    dropped.
    """
    grid = _validate(state, k, sign, dt, grid)
    if steps < 0:
        raise BoundError("steps must be nonnegative")
    coeffs = state.dense()
    it = _stepper(state, k, sign, dt, grid, nonlinear)
    for _ in range(steps):
        coeffs = next(it)
    return SpectralState.from_dense(coeffs, state.box, state.time + steps * dt)


@dataclass
class TrajectoryRow:
    t: float
    mass: float
    h_half: float

    def as_row(self) -> list[float]:
        return [self.t, self.mass, self.h_half]


def _dense_norms(coeffs: np.ndarray, weight: np.ndarray) -> tuple[float, float]:
    sq = np.abs(coeffs) ** 2
    mass = math.fsum(sq.ravel().tolist())
    return mass, math.sqrt(math.fsum((weight * sq).ravel().tolist()))


def trajectory_diagnostics(
    state: SpectralState,
    k: int = 1,
    sign: int = 1,
    dt: float = 1e-3,
    steps: int = 1,
    every: int = 1,
    grid: int | None = None,
    nonlinear: bool = True,
) -> Iterator[TrajectoryRow]:
    """Stream (t, mass, H^1/2 norm) every `every` steps, starting at t0."""
    grid = _validate(state, k, sign, dt, grid)
    if every < 1:
        raise BoundError("every must be >= 1")
    K = state.box
    r = np.arange(-K, K + 1, dtype=np.float64)
    x1, x2, x3 = np.meshgrid(r, r, r, indexing="ij")
    weight = np.sqrt(1 + x1 * x1 + x2 * x2 + x3 * x3)
    mass, h = _dense_norms(state.dense(), weight)
    yield TrajectoryRow(state.time, mass, h)
    it = _stepper(state, k, sign, dt, grid, nonlinear)
    for n in range(1, steps + 1):
        coeffs = next(it)
        if n % every == 0 or n == steps:
            mass, h = _dense_norms(coeffs, weight)
            yield TrajectoryRow(state.time + n * dt, mass, h)
    logging.debug("trajectory: %d steps of dt=%g on %d^3", steps, dt, grid)
