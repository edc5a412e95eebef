"""Checks on the primitive cone catalogue."""

from typing import Any, Mapping

import numpy as np

from hyperl4.checks.base import AbstractCheck, Assessment
from hyperl4.lattice_core import (
    canonical_direction,
    cone_count_box,
    cone_count_box_bruteforce,
    cone_m,
    enumerate_cone_irr,
)


class ConeEnumerationCheck(AbstractCheck):
    name = "cone_enumeration"
    reference = "primitive cone points of norm <= M number O(M)"
    defaults = {"compare_max_M": 512, "ratio_max_M": 4096, "box_max_N": 24}
    hard_pins = {"C_cone": 8}

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        cmp_M = int(params["compare_max_M"])
        brute = enumerate_cone_irr(cmp_M, "bruteforce")
        param = enumerate_cone_irr(cmp_M, "parametrized")

        top = int(params["ratio_max_M"])
        catalog = enumerate_cone_irr(top)
        arr = catalog.as_array()
        norms = np.sort((arr * arr).sum(axis=1))
        Ms = np.arange(2, top + 1, dtype=np.int64)
        counts = np.searchsorted(norms, Ms * Ms, side="right")
        ratios = counts / Ms
        worst = int(np.argmax(ratios))

        box_N = int(params["box_max_N"])
        box_mismatch = [
            N
            for N in range(0, box_N + 1)
            if cone_count_box(N) != cone_count_box_bruteforce(N)
        ]
        # H(Cone_M) == H(Cone^irr_M) on a small box
        M_small = min(8, cmp_M)
        normals_m = {canonical_direction(p) for p in cone_m(M_small, 2 * M_small)}
        normals_irr = set(enumerate_cone_irr(M_small).normals())
        return {
            "catalog_equal": brute.points == param.points,
            "catalog_size": len(param),
            "max_ratio": float(ratios[worst]),
            "max_ratio_M": int(Ms[worst]),
            "final_ratio": float(ratios[-1]),
            "box_mismatches": box_mismatch,
            "cone_m_normals_equal": normals_m == normals_irr,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.require(measured["catalog_equal"], "bruteforce and parametrized catalogues differ")
        a.require(
            not measured["box_mismatches"],
            f"cone_count_box differs from the scan at N={measured['box_mismatches']}",
        )
        a.require(measured["cone_m_normals_equal"], "Cone_M normals differ from Cone^irr_M")
        a.at_most("#Cone^irr_M / M", measured["max_ratio"], "C_cone")
