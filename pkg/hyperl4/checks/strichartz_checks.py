"""Checks on exact L^4 norms, extremizer scaling and the good/bad split."""

from typing import Any, Mapping

from hyperl4.checks.base import AbstractCheck, Assessment, upper_pin
from hyperl4.checks.corpus import (
    planar_grid,
    random_complex,
    random_exact,
    rng_for,
)
from hyperl4.resonance_count import omega_oracle, on_any_plane
from hyperl4.strichartz_lab import (
    ExtremizerKind,
    ExtremizerSpec,
    cube_omega2_profile,
    extremizer,
    good_bad_split,
    l4_fourth_power,
    l4_quadrature,
    main_estimate_ratio,
    scaling_exponent,
)
from hyperl4.weighted_set import WeightedSet, WeightMode


class ScalingCheck(AbstractCheck):
    """Fitted slope of log(L^4 / l^2) against log N for one family."""

    kind: ExtremizerKind = ExtremizerKind.LINE

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        kwargs = {"budget": int(params["budget"])} if "budget" in params else {}
        fit = scaling_exponent(
            self.kind, [int(N) for N in params["N_list"]], **kwargs
        )
        ratios = [pt.ratio for pt in fit.points]
        return {
            "slope": fit.slope,
            "stderr": fit.stderr,
            "monotone": all(x < y for x, y in zip(ratios, ratios[1:])),
            "fit": fit.to_dict(),
        }

    def assess(self, measured, params, a: Assessment) -> None:
        target, tol = float(params["target"]), float(params["tolerance"])
        a.within(f"{self.kind.value} slope", measured["slope"], target - tol, target + tol)
        a.require(measured["monotone"], f"{self.kind.value} ratios are not increasing")


class LineScalingCheck(ScalingCheck):
    name = "scaling_line"
    reference = "line extremizer: L^4 / l^2 grows like N^(1/4)"
    kind = ExtremizerKind.LINE
    defaults = {"N_list": [8, 16, 32, 64, 128, 256, 512], "target": 0.25, "tolerance": 0.05}


class CubeScalingCheck(ScalingCheck):
    name = "scaling_cube"
    reference = "cube extremizer: L^4 / l^2 grows like N^(1/4)"
    kind = ExtremizerKind.CUBE
    # the N = 16 cube has about 6.5e10 resonant pairs
    defaults = {
        "N_list": [4, 6, 8, 12, 16],
        "target": 0.25,
        "tolerance": 0.06,
        "budget": 10**11,
    }


class ProductScalingCheck(ScalingCheck):
    name = "scaling_product"
    reference = "product extremizer: L^4 / l^2 grows like N^(1/4)"
    kind = ExtremizerKind.PRODUCT
    defaults = {"N_list": [8, 12, 16, 24, 32], "target": 0.25, "tolerance": 0.06}


class MainEstimateCheck(AbstractCheck):
    name = "main_estimate"
    reference = "||exp(it box) f||_4 <= C N^(1/4) ||f|| for supp f in [-N, N]^3"
    defaults = {
        "line_N": [4, 16, 64, 256],
        "product_N": [4, 8, 16],
        "cube_N": [2, 4, 6],
        "trials": 30,
        "max_points": 60,
        "radius": 8,
        "cube_fraction": 0.1,
    }

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        family_max: dict[str, float] = {}
        for kind, key in (
            (ExtremizerKind.LINE, "line_N"),
            (ExtremizerKind.PRODUCT, "product_N"),
            (ExtremizerKind.CUBE, "cube_N"),
        ):
            for N in params[key]:
                f = extremizer(ExtremizerSpec(kind, int(N)))
                r = main_estimate_ratio(f, f.max_abs_coord())
                family_max[kind.value] = max(family_max.get(kind.value, 0.0), r)
        random_max = 0.0
        for _ in range(int(params["trials"])):
            for f in (
                random_exact(rng, int(params["max_points"]), int(params["radius"])),
                random_complex(rng, int(params["max_points"]), int(params["radius"])),
            ):
                random_max = max(random_max, main_estimate_ratio(f, max(1, f.max_abs_coord())))
        return {
            "max_ratio": max([random_max, *family_max.values()]),
            "random_max": random_max,
            "family_max": family_max,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.at_most("L^4 / (N^(1/4) ||f||)", measured["max_ratio"], "C_main")
        c_main = a.golden.values.get("C_main")
        if c_main:
            cube = measured["family_max"].get("cube", 0.0)
            a.require(
                cube >= float(params["cube_fraction"]) * c_main,
                f"cube ratio {cube:.4g} below {params['cube_fraction']} C_main",
            )

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"C_main": upper_pin(measured["max_ratio"])}


class QuadratureCheck(AbstractCheck):
    name = "quadrature"
    reference = "exact L^4 count equals the space-time integral of |u|^4"
    defaults = {"trials": 20, "max_points": 30, "radius": 3, "rel_tol": 1e-6}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        worst = 0.0
        for _ in range(int(params["trials"])):
            f = random_complex(rng, int(params["max_points"]), int(params["radius"]))
            exact = float(l4_fourth_power(f))
            grid = l4_quadrature(f, oversample=2)
            worst = max(worst, abs(grid - exact) / exact)
        return {"max_rel_error": worst}

    def assess(self, measured, params, a: Assessment) -> None:
        a.within("relative error", measured["max_rel_error"], 0.0, float(params["rel_tol"]))


class CubeGoldenCheck(AbstractCheck):
    name = "cube_golden"
    reference = "cube extremizer L^4 values and the degenerate share"
    defaults = {"N": 2, "profile_N": [1, 2, 3, 4], "oracle_max_N": 2, "rel_tol": 1e-12}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        f = extremizer(ExtremizerSpec(ExtremizerKind.CUBE, int(params["N"])))
        rows = cube_omega2_profile([int(N) for N in params["profile_N"]])
        disagree = []
        for row in rows:
            if row.N <= int(params["oracle_max_N"]):
                chi = WeightedSet.characteristic(
                    ExtremizerSpec(ExtremizerKind.CUBE, row.N).support()
                )
                slow = omega_oracle(chi, chi, chi, chi)
                if (slow.omega, slow.omega2) != (row.omega, row.omega2):
                    disagree.append(row.N)
        return {
            "l4_fourth_power": float(l4_fourth_power(f)),
            "profile": [r.to_dict() for r in rows],
            "oracle_disagrees_N": disagree,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.matches(
            f"cube N={params['N']} L^4^4",
            measured["l4_fourth_power"],
            "cube_l4_fourth_power",
            float(params["rel_tol"]),
        )
        a.require(
            not measured["oracle_disagrees_N"],
            f"cube profile differs from the oracle at N={measured['oracle_disagrees_N']}",
        )

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"cube_l4_fourth_power": measured["l4_fourth_power"]}


def good_bad_input(seed: int, N: int, max_points: int) -> WeightedSet:
    """A random exact set plus a grid on the cone-normal plane x1 + x2 = 0."""
    rng = rng_for(seed)
    noise = random_exact(rng, max_points, N)
    grid = planar_grid(N // 2, (1, 1, 0)).scaled(3)
    merged = dict(noise.to_dict())
    for p, w in grid.to_dict().items():
        merged[p] = merged.get(p, 0) + w
    return WeightedSet.from_mapping(merged, WeightMode.EXACT)


class GoodBadCheck(AbstractCheck):
    name = "good_bad"
    reference = "good/bad block split of the cube extremizer; f_bad on heavy planes"
    defaults = {"N": 8, "delta": 0.1, "c_threshold": 1.0, "max_points": 80}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        N = int(params["N"])
        delta, c = float(params["delta"]), float(params["c_threshold"])
        cube = extremizer(ExtremizerSpec(ExtremizerKind.CUBE, N))
        split = good_bad_split(cube, N, delta, c)
        # weighted input concentrated on a cone-normal plane
        f = good_bad_input(seed, N, int(params["max_points"]))
        mixed = good_bad_split(f, N, delta, c)
        planes = [p for b in mixed.blocks if not b.good for p in b.planes]
        stray = ~on_any_plane(mixed.f_bad.points, planes)
        return {
            "summary": {
                "good_blocks": split.good_blocks,
                "bad_blocks": split.bad_blocks,
                "f_bad_size": len(split.f_bad),
                "heavy_planes": sum(len(b.planes) for b in split.blocks),
            },
            "dominates": split.dominates and mixed.dominates,
            "mixed_bad_blocks": mixed.bad_blocks,
            "f_bad_off_planes": int(stray.sum()),
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(measured["dominates"], "f_bad + good parts does not dominate f")
        a.require(
            measured["f_bad_off_planes"] == 0,
            f"{measured['f_bad_off_planes']} points of f_bad lie off the heavy planes",
        )
        a.equals("good/bad summary", measured["summary"], "good_bad_summary")

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {"good_bad_summary": measured["summary"]}
