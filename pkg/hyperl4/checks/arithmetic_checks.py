"""Checks on the parabola counts, cone-plane slices and the frame {n, An, n x An}."""

from typing import Any, Mapping

from hyperl4.arithmetic_oracles import (
    ParabolaQuery,
    SliceCase,
    count_parabola_points,
    count_parabola_points_naive,
    gram_matrix,
    parabola_bound_scan,
    perp_decompose,
    slice_plane_size,
)
from hyperl4.checks.base import AbstractCheck, Assessment, upper_pin
from hyperl4.checks.corpus import rng_for
from hyperl4.lattice_core import LatticePoint, Plane, enumerate_cone_irr, form_h


class ParabolaCheck(AbstractCheck):
    name = "parabola"
    reference = "#{z^2 = q y + omega} in a box is O(sqrt N + sqrt q)"
    defaults = {
        "q_max": 200,
        "N_max": 10_000,
        "trials": 10_000,
        "oracle_q_max": 20,
        "oracle_N": 200,
        "oracle_omegas": 100,
    }
    hard_pins = {"C_parab": 5}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        scan = parabola_bound_scan(
            int(params["q_max"]), int(params["N_max"]), int(params["trials"]), seed
        )
        rng = rng_for(seed ^ 0xA11CE)
        N = int(params["oracle_N"])
        mismatches = []
        for q in range(1, int(params["oracle_q_max"]) + 1):
            omegas = rng.integers(-q * N, q * N + 2, size=int(params["oracle_omegas"]))
            for omega in omegas.tolist():
                query = ParabolaQuery(q, omega, N)
                if count_parabola_points(query) != count_parabola_points_naive(query):
                    mismatches.append(query.to_dict())
        return {
            "scan": scan.to_dict(),
            "max_ratio": scan.max_ratio,
            "oracle_mismatches": mismatches,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(
            not measured["oracle_mismatches"],
            f"parabola count differs from the loop: {measured['oracle_mismatches'][:3]}",
        )
        a.at_most("count / (sqrt N + sqrt q)", measured["max_ratio"], "C_parab")


class SliceCaseCheck(AbstractCheck):
    name = "slice_cases"
    reference = "slices of A_{a,b} by cone-normal planes: curve and line cases"
    defaults = {"trials": 30, "N": 32, "M": 4}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        N, M = int(params["N"]), int(params["M"])
        normals = enumerate_cone_irr(M).normals()
        curve_max, line_violations, cases = 0.0, [], {"curve_case": 0, "line_case": 0}

        def point(r: int) -> LatticePoint:
            return LatticePoint.of(rng.integers(-r, r + 1, size=3).tolist())

        for _ in range(int(params["trials"])):
            n = normals[int(rng.integers(len(normals)))]
            # curve instance: a = xi1 + xi3 through xi1
            x1, x3 = point(N // 2), point(N // 2)
            plane = Plane.through(x1, n)
            instances = [(x1 + x3, form_h(x1) + form_h(x3), plane)]
            # line instance: q = p + t An keeps a/2 on the plane through p
            p = point(N // 4)
            t = int(rng.integers(1, 3))
            q = p + n.apply_a().scale(t)
            instances.append((p + q, form_h(p) + form_h(q), Plane.through(p, n)))
            for a, b, H in instances:
                report = slice_plane_size(a, b, H, N)
                cases[report.case.value] += 1
                if report.case == SliceCase.CURVE:
                    curve_max = max(curve_max, report.ratio)
                elif report.count > 2 * (2 * N + 1) or report.perp_classes > 2:
                    line_violations.append(
                        {"a": list(a.as_tuple()), "b": b, **report.to_dict()}
                    )
        return {
            "curve_max_ratio": curve_max,
            "line_violations": line_violations,
            "cases": cases,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(
            not measured["line_violations"],
            f"line-case slice exceeds two lines: {measured['line_violations'][:2]}",
        )
        a.at_most(
            "curve-case count / (M^4 sqrt N)",
            measured["curve_max_ratio"],
            "C_curve",
        )

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"C_curve": upper_pin(max(measured["curve_max_ratio"], 1e-12))}


class PerpFrameCheck(AbstractCheck):
    name = "perp_frame"
    reference = "{n, An, n x An} is an orthogonal frame for a cone normal n"
    defaults = {"M": 20, "samples": 10, "radius": 50}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        bad_gram, bad_decomp = [], []
        normals = enumerate_cone_irr(int(params["M"])).normals()
        r = int(params["radius"])
        for n in normals:
            d = n.norm_sq()
            if gram_matrix(n) != [[d, 0, 0], [0, d, 0], [0, 0, d * d]]:
                bad_gram.append(list(n.as_tuple()))
            for _ in range(int(params["samples"])):
                xi = LatticePoint.of(rng.integers(-r, r + 1, size=3).tolist())
                dec = perp_decompose(xi, n)
                ok = dec.reconstruct() == xi.as_tuple()
                if not ok or not dec.perp_parallel_to_frame():
                    bad_decomp.append(dec.to_dict())
        return {
            "normals": len(normals),
            "bad_gram": bad_gram,
            "bad_decompositions": bad_decomp,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(
            not measured["bad_gram"],
            f"non-orthogonal frames: {measured['bad_gram'][:3]}",
        )
        a.require(
            not measured["bad_decompositions"],
            f"decomposition fails: {measured['bad_decompositions'][:2]}",
        )
