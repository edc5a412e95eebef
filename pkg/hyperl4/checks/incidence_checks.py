"""Checks on the incidence counters and their classical bounds."""

from typing import Any, Mapping

import numpy as np

from hyperl4.checks.base import AbstractCheck, Assessment, upper_pin
from hyperl4.checks.corpus import random_points, rng_for
from hyperl4.incidence_geometry import (
    GreatCircle,
    LatticeLine,
    PlanarLine,
    ProjectivePoint,
    count_incidences_point_line,
    count_incidences_point_line_naive,
    count_incidences_sphere,
    count_incidences_sphere_projected,
    crossing_bound,
    crossing_incidence_count,
    crossing_incidence_naive,
    line_family_oracle,
    line_family_statistics,
    rich_lines,
    rich_lines_bound,
    rich_lines_oracle,
    szemeredi_trotter_bound,
)
from hyperl4.lattice_core import LatticePoint

GRID_SLOPES = ((0, 1), (1, 0), (1, 1), (1, -1), (1, 2), (2, 1), (1, -2), (2, -1))


def grid_points(k: int) -> list[tuple[int, int]]:
    return [(x, y) for x in range(k) for y in range(k)]


def grid_lines(k: int) -> list[PlanarLine]:
    """Every line of a few small slopes through a point of the k x k grid."""
    lines = set()
    for dx, dy in GRID_SLOPES:
        # direction (dx, dy) has normal (dy, -dx)
        for x, y in grid_points(k):
            lines.add(PlanarLine.of(dy, -dx, -(dy * x - dx * y)))
    return sorted(lines, key=lambda ln: (ln.A, ln.B, ln.C))


def _random_directions(rng: np.random.Generator, n: int, r: int) -> list[LatticePoint]:
    out = []
    for row in random_points(rng, n, r).tolist():
        if any(row):
            out.append(LatticePoint.of(row))
    return out


class IncidenceCheck(AbstractCheck):
    name = "incidence"
    reference = "point-line, rich-line and great-circle incidence counts"
    defaults = {
        "grid_sizes": [4, 8, 16, 32],
        "random_configs": 20,
        "rich_k": [2, 3, 4],
        "rich_grid_sizes": [4, 6, 8],
        "sphere_configs": 100,
        "sphere_size": 40,
        "crossing_configs": 20,
        "family_configs": 10,
        "oracle_max_points": 10_000,
    }

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)
        mismatches: list[str] = []
        st_max = 0.0
        for k in params["grid_sizes"]:
            pts, lines = grid_points(int(k)), grid_lines(int(k))
            count = count_incidences_point_line(pts, lines)
            if len(pts) <= int(params["oracle_max_points"]):
                if count != count_incidences_point_line_naive(pts, lines):
                    mismatches.append(f"point-line grid k={k}")
            st_max = max(st_max, count / szemeredi_trotter_bound(len(pts), len(lines)))
        for i in range(int(params["random_configs"])):
            pts = [tuple(p) for p in rng.integers(-10, 11, size=(60, 2)).tolist()]
            pairs = rng.integers(0, len(pts), size=(40, 2)).tolist()
            lines = [
                PlanarLine.through(pts[a], pts[b]) for a, b in pairs if pts[a] != pts[b]
            ]
            if count_incidences_point_line(pts, lines) != count_incidences_point_line_naive(
                pts, lines
            ):
                mismatches.append(f"point-line random[{i}]")

        rich_max = 0.0
        for g in params["rich_grid_sizes"]:
            pts = grid_points(int(g))
            for k in params["rich_k"]:
                fast = rich_lines(pts, int(k))
                if fast != rich_lines_oracle(pts, int(k)):
                    mismatches.append(f"rich lines grid={g} k={k}")
                incidences = sum(r.count for r in fast)
                rich_max = max(rich_max, incidences / rich_lines_bound(len(pts), int(k)))

        for i in range(int(params["sphere_configs"])):
            dirs = _random_directions(rng, int(params["sphere_size"]), 6)
            points = [ProjectivePoint.of(v) for v in dirs]
            # circles through pairs of the points, so incidences occur
            circles = set()
            for a, b in rng.integers(0, len(dirs), size=(len(dirs), 2)).tolist():
                normal = dirs[a].cross(dirs[b])
                if any(normal):
                    circles.add(GreatCircle.of(normal))
            direct = count_incidences_sphere(points, circles)
            projected, _ = count_incidences_sphere_projected(points, circles)
            if direct != projected:
                mismatches.append(f"sphere[{i}]: {direct} != {projected}")

        cross_max = 0.0
        for i in range(int(params["crossing_configs"])):
            xi = LatticePoint.of(rng.integers(-5, 6, size=3).tolist())
            L = {LatticeLine.through(xi, v) for v in _random_directions(rng, 30, 4)}
            Lp = {LatticeLine.through(xi, v) for v in _random_directions(rng, 30, 4)}
            count = crossing_incidence_count(xi, L, Lp)
            if count != crossing_incidence_naive(L, Lp):
                mismatches.append(f"crossing[{i}]")
            cross_max = max(cross_max, count / crossing_bound(len(L), len(Lp)))

        for i in range(int(params["family_configs"])):
            pts = random_points(rng, 50, 3).tolist()
            if line_family_statistics(pts).rows != line_family_oracle(pts):
                mismatches.append(f"line family[{i}]")

        return {
            "mismatches": mismatches,
            "st_max_ratio": st_max,
            "rich_max_ratio": rich_max,
            "crossing_max_ratio": cross_max,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(not measured["mismatches"], f"oracle mismatches: {measured['mismatches'][:3]}")
        a.at_most("incidences / ST bound", measured["st_max_ratio"], "C_ST")
        a.at_most("rich incidences / (n^2/k^2 + n)", measured["rich_max_ratio"], "C_rich")
        a.at_most("crossings / ST bound", measured["crossing_max_ratio"], "C_crossing")

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {
            "C_ST": upper_pin(measured["st_max_ratio"]),
            "C_rich": upper_pin(measured["rich_max_ratio"]),
            "C_crossing": upper_pin(max(measured["crossing_max_ratio"], 1e-12)),
        }
