"""Checks on the resonant-quadruple counts."""

import math
from typing import Any, Mapping

from hyperl4.checks.base import AbstractCheck, Assessment, upper_pin
from hyperl4.checks.corpus import (
    plane_sample,
    planar_grid,
    product_set,
    random_characteristic,
    random_exact,
    rng_for,
    shell_sample,
)
from hyperl4.lattice_core import LatticePoint, Plane, enumerate_cone_irr
from hyperl4.resonance_count import (
    bilinear_l2,
    error_part,
    heavy_planes,
    line_point_bound,
    omega1_plane_restricted,
    omega_bucketed,
    omega_oracle,
    omega_of,
)
from hyperl4.strichartz_lab import ExtremizerKind, ExtremizerSpec
from hyperl4.weighted_set import WeightedSet


def _support(kind: ExtremizerKind, N: int) -> WeightedSet:
    return WeightedSet.characteristic(ExtremizerSpec(kind, N).support())


def _cube(N: int) -> WeightedSet:
    return _support(ExtremizerKind.CUBE, N)


def line_closed_form(N: int) -> int:
    """Omega(chi_line(N)) = N(N+1)(2N+1)/3 - N^2."""
    return N * (N + 1) * (2 * N + 1) // 3 - N * N


class OracleEquivalenceCheck(AbstractCheck):
    name = "oracle_equivalence"
    reference = "bucketed count equals the quadruple enumeration"
    defaults = {
        "trials": 100,
        "weighted_trials": 20,
        "max_points": 40,
        "radius": 10,
        "extremizer_max_N": 8,
    }

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        cases: list[tuple[str, WeightedSet]] = []
        for i in range(int(params["trials"])):
            f = random_characteristic(rng, int(params["max_points"]), int(params["radius"]))
            cases.append((f"random[{i}]", f))
        for i in range(int(params["weighted_trials"])):
            f = random_exact(rng, int(params["max_points"]), int(params["radius"]))
            cases.append((f"weighted[{i}]", f))
        for N in range(1, int(params["extremizer_max_N"]) + 1):
            cases.append((f"line N={N}", _support(ExtremizerKind.LINE, N)))
            cases.append((f"product N={N}", _support(ExtremizerKind.PRODUCT, N)))

        mismatches = []
        for label, f in cases:
            fast = omega_bucketed(f, f, f, f)
            slow = omega_oracle(f, f, f, f)
            for part in ("omega", "omega1", "omega2"):
                if getattr(fast, part) != getattr(slow, part):
                    mismatches.append(f"{label}: {part}")
        return {"cases": len(cases), "mismatches": mismatches}

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(
            not measured["mismatches"],
            f"{len(measured['mismatches'])} mismatches, first: "
            f"{measured['mismatches'][:3]}",
        )


class LineClosedFormCheck(AbstractCheck):
    name = "line_closed_form"
    reference = "flat line family: exact count and no non-degenerate resonances"
    defaults = {"max_N": 50}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        bad_omega, bad_omega1 = [], []
        for N in range(1, int(params["max_N"]) + 1):
            report = omega_of(_support(ExtremizerKind.LINE, N))
            if report.omega != line_closed_form(N):
                bad_omega.append(N)
            if report.omega1 != 0:
                bad_omega1.append(N)
        return {"omega_mismatch_N": bad_omega, "omega1_nonzero_N": bad_omega1}

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(
            not measured["omega_mismatch_N"],
            f"closed form fails at N={measured['omega_mismatch_N']}",
        )
        a.require(
            not measured["omega1_nonzero_N"],
            f"Omega1 != 0 at N={measured['omega1_nonzero_N']}",
        )


def _diameter_corpus(
    params: Mapping[str, Any], seed: int
) -> list[tuple[str, WeightedSet]]:
    rng = rng_for(seed)
    size, radius = int(params["max_points"]), int(params["radius"])
    corpus = []
    for i in range(int(params["trials"])):
        corpus.append((f"random[{i}]", random_exact(rng, size, radius)))
    for n in range(1, int(params["grid_max"]) + 1):
        corpus.append((f"grid n={n}", planar_grid(n)))
        corpus.append((f"cone-plane grid n={n}", planar_grid(n, (1, 1, 0))))
    for N in range(1, int(params["cube_max_N"]) + 1):
        corpus.append((f"cube N={N}", _cube(N)))
    return corpus


class DiameterBoundCheck(AbstractCheck):
    name = "omega2_diameter"
    reference = "degenerate resonances are bounded by the diameter; heavy planes"
    defaults = {
        "trials": 40,
        "max_points": 60,
        "radius": 12,
        "grid_max": 6,
        "cube_max_N": 3,
        "radii": [2, 4, 8],
        "line_directions": 20,
    }
    hard_pins = {"C2": 16}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        radii = [int(M) for M in params["radii"]]
        cone_sizes = {M: len(enumerate_cone_irr(M)) for M in radii}
        rng = rng_for(seed ^ 0x5EED)
        worst_c2, worst_err = 0.0, 0.0
        plane_violations, line_violations = [], []
        for label, f in _diameter_corpus(params, seed):
            d = max(f.diam(), 1.0)
            mass4 = float(f.l2_norm_sq()) ** 2
            omega2 = float(omega_of(f).omega2)
            worst_c2 = max(worst_c2, omega2 / (d * mass4))
            for M in radii:
                planes = heavy_planes(f, M)
                if len(planes) > M * M * cone_sizes[M]:
                    plane_violations.append(f"{label} M={M}")
                err = error_part(f, M)
                if len(err):
                    e2 = float(omega_of(err).omega2)
                    worst_err = max(worst_err, e2 * M / (d * mass4))
            pts = f.points
            if len(pts) >= 2:
                for _ in range(int(params["line_directions"])):
                    i, j = rng.choice(len(pts), size=2, replace=False)
                    xi = LatticePoint.of(pts[j] - pts[i])
                    if not line_point_bound(xi, f).holds:
                        line_violations.append(f"{label} xi={xi}")
        return {
            "max_omega2_ratio": worst_c2,
            "max_error_part_ratio": worst_err,
            "heavy_plane_violations": plane_violations,
            "line_point_violations": line_violations,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(
            not measured["heavy_plane_violations"],
            f"heavy-plane count above M^2 #Cone^irr_M: {measured['heavy_plane_violations'][:3]}",
        )
        a.require(
            not measured["line_point_violations"],
            f"line point bound fails: {measured['line_point_violations'][:3]}",
        )
        a.at_most("Omega2 / (diam ||f||^4)", measured["max_omega2_ratio"], "C2")
        a.at_most(
            "Omega2(error) M / (diam ||f||^4)", measured["max_error_part_ratio"], "C_error"
        )

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"C_error": upper_pin(measured["max_error_part_ratio"])}


class Omega1GrowthCheck(AbstractCheck):
    name = "omega1_growth"
    reference = "non-degenerate resonances of a set S grow like #S^(7/3)"
    defaults = {
        "cube_max_N": 12,
        "grid_max": 12,
        "trials": 20,
        "max_points": 400,
        "radius": 12,
        "product_size": 8,
    }

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        radius = int(params["radius"])
        corpus = [
            (f"cube N={N}", _cube(N))
            for N in range(1, int(params["cube_max_N"]) + 1)
        ]
        corpus += [
            (f"grid n={n}", planar_grid(n))
            for n in range(1, int(params["grid_max"]) + 1)
        ]
        for i in range(int(params["trials"])):
            corpus.append(
                (
                    f"random[{i}]",
                    random_characteristic(rng, int(params["max_points"]), radius),
                )
            )
            corpus.append(
                (
                    f"product[{i}]",
                    product_set(rng, int(params["product_size"]), radius),
                )
            )
        worst, worst_label = 0.0, ""
        for label, f in corpus:
            ratio = float(omega_of(f).omega1) / len(f) ** (7 / 3)
            if ratio > worst:
                worst, worst_label = ratio, label
        return {"max_ratio": worst, "worst_case": worst_label, "cases": len(corpus)}

    def assess(self, measured, params, a: Assessment) -> None:
        a.at_most("Omega1(chi_S) / #S^(7/3)", measured["max_ratio"], "C_omega1")

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"C_omega1": upper_pin(measured["max_ratio"])}


class BilinearCheck(AbstractCheck):
    name = "bilinear"
    reference = "bilinear estimate gains min(N1, N2)^(1/2)"
    defaults = {"scales": [2, 4, 8, 16, 32], "shell_size": 60}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        scales = [int(N) for N in params["scales"]]
        size = int(params["shell_size"])
        shells = {
            N: WeightedSet.characteristic(shell_sample(rng, N, size))
            for N in scales
        }
        rows, worst = [], 0.0
        for N1 in scales:
            for N2 in scales:
                g1, g2 = shells[N1], shells[N2]
                value = math.sqrt(float(bilinear_l2(g1, g2)))
                ratio = value / (math.sqrt(min(N1, N2)) * g1.l2_norm() * g2.l2_norm())
                rows.append({"N1": N1, "N2": N2, "ratio": ratio})
                worst = max(worst, ratio)
        return {"max_ratio": worst, "rows": rows}

    def assess(self, measured, params, a: Assessment) -> None:
        a.at_most(
            "||u1 u2|| / (min N^(1/2) ||g1|| ||g2||)",
            measured["max_ratio"],
            "C_bilinear",
        )

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"C_bilinear": upper_pin(measured["max_ratio"])}


class PlaneRestrictedCheck(AbstractCheck):
    name = "plane_restricted"
    reference = "non-degenerate resonances on four cone-normal planes"
    defaults = {"trials": 12, "M": 5, "radius": 6, "size": 30, "oracle_max": 10**6}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        normals = enumerate_cone_irr(int(params["M"])).normals()
        worst, oracle_mismatch, rows = 0.0, [], []
        for t in range(int(params["trials"])):
            picks = rng.choice(len(normals), size=4, replace=True)
            planes = [Plane(normals[int(i)], int(rng.integers(-3, 4))) for i in picks]
            fs = [
                WeightedSet.characteristic(
                    plane_sample(rng, H, int(params["radius"]), int(params["size"]))
                )
                for H in planes
            ]
            report = omega1_plane_restricted(fs, planes)
            worst = max(worst, report.ratio)
            if math.prod(len(f) for f in fs) <= int(params["oracle_max"]):
                if omega_oracle(*fs).omega1 != report.value:
                    oracle_mismatch.append(t)
            rows.append(report.to_dict())
        return {"max_ratio": worst, "oracle_mismatch": oracle_mismatch, "rows": rows}

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(
            not measured["oracle_mismatch"],
            f"restricted Omega1 differs from the oracle in trials {measured['oracle_mismatch']}",
        )
        a.at_most("restricted Omega1 ratio", measured["max_ratio"], "C_plane")

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"C_plane": upper_pin(max(measured["max_ratio"], 1e-12))}
