"""
Space-time L^4 norms of linear hyperbolic evolutions on T^3.

The propagator multiplies mode xi by exp(2 pi i t h(xi)), so over the
period t in [0, 1] the fourth power of the L^4([0,1] x T^3) norm of the
evolution of f is exactly Omega(f, f, f, f). The module builds the three
extremizer families, fits their scaling exponents, and runs the rank-dyadic
atomic decomposition and good/bad split of the p = 4 estimate.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from hyperl4.errors import BoundError, BudgetExceededError, ContainmentError
from hyperl4.lattice_core import Plane
from hyperl4.resonance_count import (
    ResonanceReport,
    heavy_planes,
    omega_of,
    on_any_plane,
    to_jsonable,
)
from hyperl4.weighted_set import WeightedSet, WeightMode

EXTREMIZER_LIMITS = {"cube": 64, "line": 10**5, "product": 10**3}
QUADRATURE_MAX_WORK = 1 << 31


def mu_general(d: int, v: int, p: float) -> float:
    """max{d/2 - (d+2)/p, v/2 - v/p} for the signature (v, d - v)."""
    if p < 2:
        raise BoundError(f"p must be >= 2, got {p}")
    if d < 1 or not 0 <= v <= d:
        raise BoundError(f"Invalid signature d={d}, v={v}")
    if math.isinf(p):
        return max(d / 2, v / 2)
    return max(d / 2 - (d + 2) / p, v / 2 - v / p)


def mu(p: float) -> float:
    """max(3/2 - 5/p, 1/2 - 1/p)."""
    return mu_general(3, 1, p)


# Extremizers


class ExtremizerKind(StrEnum):
    CUBE = "cube"
    LINE = "line"
    PRODUCT = "product"


@dataclass(frozen=True)
class ExtremizerSpec:
    kind: ExtremizerKind
    N: int

    def __post_init__(self) -> None:
        kind = ExtremizerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        limit = EXTREMIZER_LIMITS[kind.value]
        if not 1 <= self.N <= limit:
            raise BoundError(f"{kind.value} extremizer needs 1 <= N <= {limit}")

    def support(self) -> np.ndarray:
        N = self.N
        if self.kind == ExtremizerKind.CUBE:
            r = np.arange(-N, N + 1, dtype=np.int64)
            g = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1)
            return g.reshape(-1, 3)
        k = np.arange(1, N + 1, dtype=np.int64)
        if self.kind == ExtremizerKind.LINE:
            return np.stack([k, k, np.zeros_like(k)], axis=1)
        xi = np.repeat(k, N)
        eta = np.tile(k, N)
        return np.stack([xi, xi, eta], axis=1)

    def weight(self) -> float:
        exponent = {"cube": 1.5, "line": 0.5, "product": 1.0}[self.kind.value]
        return self.N ** (-exponent)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "N": self.N}


def extremizer(spec: ExtremizerSpec) -> WeightedSet:
    """Fourier coefficients of the extremizer: a uniform numeric weight."""
    pts = spec.support()
    w = np.full(len(pts), spec.weight(), dtype=np.complex128)
    return WeightedSet(pts, w, WeightMode.NUMERIC)


# Exact L^4


def omega_report(f: WeightedSet, **kwargs: Any) -> tuple[ResonanceReport, Any]:
    """(report, scale) with Omega(f) = scale * report.omega.

    A uniform numeric weight is factored out so the count itself is exact.
    """
    w = f.uniform_weight()
    if w is not None and not f.is_exact:
        chi = WeightedSet.characteristic(f.points)
        return omega_of(chi, **kwargs), abs(complex(w)) ** 4
    return omega_of(f, **kwargs), 1


def l4_fourth_power(f: WeightedSet, **kwargs: Any) -> Fraction | float:
    """Omega(f, f, f, f), real and nonnegative."""
    if len(f) == 0:
        return Fraction(0) if f.is_exact else 0.0
    report, scale = omega_report(f, **kwargs)
    value = report.omega
    if isinstance(value, Fraction):
        return value if scale == 1 else float(value) * scale
    return complex(value).real * scale


def l4_norm_exact(f: WeightedSet, **kwargs: Any) -> float:
    """||exp(2 pi i t h) f||_{L^4([0,1] x T^3)} = Omega(f)^(1/4)."""
    return max(float(l4_fourth_power(f, **kwargs)), 0.0) ** 0.25


def diam_form_ratio(f: WeightedSet, **kwargs: Any) -> float:
    """l4_norm_exact(f) / (max(diam, 1)^(1/4) ||f||)."""
    if len(f) == 0:
        return 0.0
    d = max(f.diam(), 1.0)
    return l4_norm_exact(f, **kwargs) / (d**0.25 * f.l2_norm())


def main_estimate_ratio(f: WeightedSet, N: int, **kwargs: Any) -> float:
    """l4_norm_exact(f) / (N^(1/4) ||f||) for f supported in [-N, N]^3."""
    if f.max_abs_coord() > N:
        raise ContainmentError(f"Support is not inside [-{N},{N}]^3")
    if len(f) == 0:
        return 0.0
    return l4_norm_exact(f, **kwargs) / (N**0.25 * f.l2_norm())


def l4_quadrature(f: WeightedSet, oversample: int = 1) -> float:
    """Mean of |u|^4 over a space-time grid fine enough to be exact.

    |u|^4 is a trigonometric polynomial whose spatial frequencies span at
    most twice the support width per axis and whose time frequencies span
    twice the range of h, so sampling past those widths integrates it
    without aliasing.
    """
    if len(f) == 0:
        return 0.0
    if oversample < 1:
        raise BoundError("oversample must be >= 1")
    pts = f.points - f.points.min(axis=0)
    width = pts.max(axis=0)
    grid = tuple(int(oversample * (2 * w + 1)) for w in width.tolist())
    h = (
        f.points[:, 0] * f.points[:, 0]
        - f.points[:, 1] * f.points[:, 1]
        - f.points[:, 2] * f.points[:, 2]
    )
    h = h - h.min()
    steps = int(oversample * (2 * int(h.max()) + 1))
    if steps * math.prod(grid) > QUADRATURE_MAX_WORK:
        raise BudgetExceededError(
            "Quadrature grid too large",
            {"time_steps": steps, "grid": "x".join(map(str, grid))},
        )
    coeffs = np.zeros(grid, dtype=np.complex128)
    w = f.numeric_weights()
    size = math.prod(grid)
    total = []
    for s in range(steps):
        t = s / steps
        coeffs[pts[:, 0], pts[:, 1], pts[:, 2]] = w * np.exp(2j * np.pi * t * h)
        u = np.fft.ifftn(coeffs) * size
        total.append(float(np.mean(np.abs(u) ** 4)))
    return math.fsum(total) / steps


# Scaling fits


@dataclass
class ScalingPoint:
    N: int
    norm: float
    l2: float
    ratio: float

    def to_dict(self) -> dict:
        return {"N": self.N, "norm": self.norm, "l2": self.l2, "ratio": self.ratio}


@dataclass
class ScalingFit:
    kind: ExtremizerKind
    p: float
    slope: float
    intercept: float
    stderr: float
    predicted: float
    points: list[ScalingPoint] = field(default_factory=list)

    def residuals(self) -> list[float]:
        return [
            math.log(pt.ratio) - (self.intercept + self.slope * math.log(pt.N))
            for pt in self.points
        ]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "p": self.p,
            "slope": self.slope,
            "intercept": self.intercept,
            "stderr": self.stderr,
            "predicted": self.predicted,
            "residuals": self.residuals(),
            "points": [pt.to_dict() for pt in self.points],
        }


def fit_loglog(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares (slope, intercept, stderr of slope) of log y on log x."""
    x = np.log(np.asarray(xs, dtype=np.float64))
    y = np.log(np.asarray(ys, dtype=np.float64))
    design = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    dof = len(x) - 2
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 and sxx else 0.0
    return float(slope), float(intercept), stderr


def scaling_exponent(
    kind: ExtremizerKind | str,
    N_list: Sequence[int],
    p: float = 4,
    **kwargs: Any,
) -> ScalingFit:
    """Slope of log(L^4 / l^2) against log N along an extremizer family."""
    kind = ExtremizerKind(kind)
    if p != 4:
        raise BoundError("Only p = 4 norms are computed; use mu(p) for others")
    Ns = sorted(set(int(n) for n in N_list))
    if len(Ns) < 4:
        raise BoundError(f"Need at least 4 distinct N values, got {len(Ns)}")
    points = []
    for N in Ns:
        f = extremizer(ExtremizerSpec(kind, N))
        norm = l4_norm_exact(f, **kwargs)
        l2 = f.l2_norm()
        points.append(ScalingPoint(N, norm, l2, norm / l2))
        logging.info("scaling %s N=%d: ratio %.6f", kind.value, N, norm / l2)
    slope, intercept, stderr = fit_loglog(Ns, [pt.ratio for pt in points])
    return ScalingFit(kind, p, slope, intercept, stderr, mu(p), points)


# Atomic decomposition


@dataclass
class AtomicBlock:
    j: int
    points: np.ndarray
    level: Fraction | float
    lambda_sq: Fraction | float

    @property
    def lam(self) -> float:
        return math.sqrt(float(self.lambda_sq))

    def piece(self, mode: WeightMode) -> WeightedSet:
        """f_j = level * chi_{S_j}."""
        return WeightedSet(self.points, [self.level] * len(self.points), mode)

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "size": len(self.points),
            "level": to_jsonable(self.level),
            "lambda": self.lam,
        }


@dataclass
class AtomicDecomposition:
    blocks: list[AtomicBlock]
    mode: WeightMode

    @property
    def j_max(self) -> int:
        return self.blocks[-1].j if self.blocks else -1

    def lambda_sq_sum(self) -> Fraction | float:
        if self.mode == WeightMode.EXACT:
            return sum((b.lambda_sq for b in self.blocks), Fraction(0))
        return math.fsum(b.lambda_sq for b in self.blocks)

    def envelope(self) -> WeightedSet:
        """sum_j level_j chi_{S_j}."""
        acc = WeightedSet.empty(self.mode)
        for b in self.blocks:
            acc = acc.add(b.piece(self.mode))
        return acc

    def to_dict(self) -> dict:
        return {
            "j_max": self.j_max,
            "lambda_sq_sum": to_jsonable(self.lambda_sq_sum()),
            "blocks": [b.to_dict() for b in self.blocks],
        }


def atomic_decomposition(f: WeightedSet) -> AtomicDecomposition:
    """Rank f in decreasing order and cut the ranks at powers of two.

    Block j holds ranks [2^j, 2^(j+1)) (ranks start at 1) with level the
    value at rank 2^j; ties are broken lexicographically on coordinates.
    """
    if len(f) == 0:
        raise BoundError("atomic_decomposition needs a nonempty input")
    if not f.is_nonnegative():
        raise BoundError("atomic_decomposition needs nonnegative weights")
    if f.is_exact:
        values: list[Any] = f.weights()
    else:
        values = f.numeric_weights().real.tolist()
    pts = f.points
    # points are stored sorted by coordinates, so a stable sort on -value
    # breaks ties lexicographically
    order = sorted(range(len(values)), key=lambda i: -values[i])
    blocks = []
    j = 0
    while (1 << j) <= len(order):
        lo, hi = (1 << j) - 1, min((1 << (j + 1)) - 1, len(order))
        idx = np.array(order[lo:hi], dtype=np.int64)
        level = values[order[lo]]
        lambda_sq = (1 << j) * level * level
        blocks.append(AtomicBlock(j, pts[idx], level, lambda_sq))
        j += 1
    return AtomicDecomposition(blocks, f.mode)


# Good / bad split


@dataclass
class BlockSplit:
    j: int
    size: int
    level: Fraction | float
    omega1: Any
    omega2: Any
    threshold: float
    good: bool
    planes: list[Plane] = field(default_factory=list)
    error_omega2: Any = None

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "size": self.size,
            "level": to_jsonable(self.level),
            "omega1": to_jsonable(self.omega1),
            "omega2": to_jsonable(self.omega2),
            "threshold": self.threshold,
            "good": self.good,
            "heavy_planes": [p.to_dict() for p in self.planes],
            "error_omega2": to_jsonable(self.error_omega2),
        }


@dataclass
class GoodBadSplit:
    N: int
    delta: float
    c_threshold: float
    M: int
    blocks: list[BlockSplit]
    good_parts: list[WeightedSet]
    f_bad: WeightedSet
    dominates: bool

    @property
    def good_blocks(self) -> list[int]:
        return [b.j for b in self.blocks if b.good]

    @property
    def bad_blocks(self) -> list[int]:
        return [b.j for b in self.blocks if not b.good]

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "delta": self.delta,
            "c_threshold": self.c_threshold,
            "M": self.M,
            "good_blocks": self.good_blocks,
            "bad_blocks": self.bad_blocks,
            "f_bad_size": len(self.f_bad),
            "f_bad_mass": to_jsonable(self.f_bad.l2_norm_sq()),
            "dominates": self.dominates,
            "blocks": [b.to_dict() for b in self.blocks],
        }


def heavy_radius(N: int, delta: float) -> int:
    """M = ceil(N^delta), at least 2."""
    return max(2, math.ceil(N**delta - 1e-12))


def _subtract(a: WeightedSet, b: WeightedSet) -> WeightedSet:
    """a - b for b <= a pointwise."""
    if a.is_exact and b.is_exact:
        own = b.to_dict()
        mapping = {p: w - own.get(p, 0) for p, w in a.to_dict().items()}
        mapping = {p: w for p, w in mapping.items() if w != 0}
        if not mapping:
            return WeightedSet.empty(WeightMode.EXACT)
        return WeightedSet.from_mapping(mapping, WeightMode.EXACT)
    return a.to_numeric().add(b.to_numeric().scaled(-1))


def good_bad_split(
    f: WeightedSet,
    N: int,
    delta: float = 0.1,
    c_threshold: float = 1.0,
    **kwargs: Any,
) -> GoodBadSplit:
    """Classify each block f_j by Omega2(f_j) <= c N^(1-delta) ||f_j||^4.

    A bad block gives up its heavy planes (M = ceil(N^delta)); what stays
    good is f_j off those planes and the rest of f_j, which lives on the
    planes, goes to f_bad.
    """
    if N < 1:
        raise BoundError(f"N must be positive, got {N}")
    if not 0 < delta < 0.25:
        raise BoundError(f"delta must lie in (0, 1/4), got {delta}")
    if c_threshold <= 0:
        raise BoundError("c_threshold must be positive")
    if N & (N - 1):
        logging.warning("good_bad_split: N=%d is not dyadic", N)
    if f.max_abs_coord() > N:
        raise ContainmentError(f"Support is not inside [-{N},{N}]^3")
    M = heavy_radius(N, delta)
    decomposition = atomic_decomposition(f)
    scale = N ** (1 - delta)
    splits: list[BlockSplit] = []
    good_parts: list[WeightedSet] = []
    f_bad = WeightedSet.empty(f.mode)
    for block in decomposition.blocks:
        fj = block.piece(f.mode)
        chi = WeightedSet.characteristic(block.points)
        report = omega_of(chi, **kwargs)
        size = len(block.points)
        # f_j is flat, so the level cancels from both sides
        good = float(report.omega2) <= c_threshold * scale * size * size
        level4 = block.level**4
        split = BlockSplit(
            j=block.j,
            size=size,
            level=block.level,
            omega1=report.omega1 * level4,
            omega2=report.omega2 * level4,
            threshold=c_threshold * scale * (size * float(block.level) ** 2) ** 2,
            good=good,
        )
        if good:
            good_parts.append(fj)
        else:
            split.planes = heavy_planes(fj, M)
            f_error = fj.restrict(~on_any_plane(fj.points, split.planes))
            if len(f_error):
                split.error_omega2 = omega_of(f_error, **kwargs).omega2
            else:
                split.error_omega2 = 0
            good_parts.append(f_error)
            f_bad = f_bad.add(_subtract(fj, f_error))
        splits.append(split)
        logging.debug("good_bad_split: block %d %s", block.j, "good" if good else "bad")
    recon = f_bad
    for part in good_parts:
        recon = recon.add(part)
    dominates = recon.dominates(f, tol=1e-12 if not f.is_exact else 0.0)
    return GoodBadSplit(N, delta, c_threshold, M, splits, good_parts, f_bad, dominates)


# Cube profile


@dataclass
class CubeProfileRow:
    N: int
    omega: int
    omega1: int
    omega2: int

    @property
    def omega2_share(self) -> float:
        return self.omega2 / self.omega if self.omega else 0.0

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "log_N": math.log(self.N),
            "omega": self.omega,
            "omega1": self.omega1,
            "omega2": self.omega2,
            "omega2_share": self.omega2_share,
        }


def cube_omega2_profile(N_list: Sequence[int], **kwargs: Any) -> list[CubeProfileRow]:
    """Omega, Omega1, Omega2 of chi_{[-N,N]^3}; the weight N^(-3/2) cancels in shares."""
    rows = []
    for N in sorted(set(N_list)):
        spec = ExtremizerSpec(ExtremizerKind.CUBE, N)
        report = omega_of(WeightedSet.characteristic(spec.support()), **kwargs)
        rows.append(
            CubeProfileRow(N, int(report.omega), int(report.omega1), int(report.omega2))
        )
        logging.info("cube profile N=%d: %s", N, rows[-1].to_dict())
    return rows
