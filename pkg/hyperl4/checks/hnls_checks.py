"""Checks on the ill-posedness example and the split-step integrator."""

import math
from typing import Any, Mapping

import numpy as np

from hyperl4.checks.base import AbstractCheck, Assessment, lower_pin
from hyperl4.checks.corpus import random_complex, rng_for
from hyperl4.hnls_lab import (
    SpectralState,
    gamma_lower_sum,
    illposed_cubic_coefficients,
    illposed_hs_norm_sq,
    picard_ratio,
    splitstep_evolve,
    trajectory_diagnostics,
)
from hyperl4.weighted_set import WeightedSet, WeightMode

# sum_k sqrt(2) (sqrt(1 + 1/(2k^2)) - 1) / k: first term and a bound on the total
HS_OFFSET_LOW = math.sqrt(2) * (math.sqrt(1.5) - 1)
HS_OFFSET_HIGH = 0.3894


def harmonic(N: int) -> float:
    return math.fsum(1.0 / k for k in range(1, N + 1))


class IllPosedCheck(AbstractCheck):
    name = "illposed"
    reference = "cubic Picard iterate grows like log N at H^(1/2)"
    defaults = {
        "exponents": [4, 5, 6, 7, 8, 9, 10, 11, 12],
        "band_low": 0.9,
        "band_high": 1.25,
        "gamma_k": [8, 64, 512],
        "rel_tol": 1e-9,
    }

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        Ns = [1 << int(e) for e in params["exponents"]]
        top = Ns[-1]
        hs = illposed_hs_norm_sq(top)
        ratios = [picard_ratio(N) for N in Ns]
        ks, c = illposed_cubic_coefficients(top)
        gamma_rows = []
        for k in params["gamma_k"]:
            k = int(k)
            full = float(c[k - int(ks[0])])
            gamma_rows.append({"k": k, "gamma": gamma_lower_sum(k, top), "full": full})
        return {
            "N": top,
            "hs_over_log": hs / math.log(top),
            "hs_offset": hs - math.sqrt(2) * harmonic(top),
            "picard": [{"N": N, "ratio": r} for N, r in zip(Ns, ratios)],
            "picard_increasing": all(x < y for x, y in zip(ratios, ratios[1:])),
            "picard_min_over_log": min(r / math.log(N) for N, r in zip(Ns, ratios)),
            "picard_r16": picard_ratio(16),
            "gamma": gamma_rows,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        root2 = math.sqrt(2)
        a.within(
            "||phi_N||^2 / log N",
            measured["hs_over_log"],
            float(params["band_low"]) * root2,
            float(params["band_high"]) * root2,
        )
        a.within(
            "||phi_N||^2 - sqrt(2) H_N",
            measured["hs_offset"],
            HS_OFFSET_LOW,
            HS_OFFSET_HIGH,
        )
        a.require(
            measured["picard_increasing"], "picard_ratio is not increasing in N"
        )
        a.at_least(
            "picard_ratio / log N", measured["picard_min_over_log"], "picard_lower"
        )
        a.matches(
            "picard_ratio(16)",
            measured["picard_r16"],
            "picard_r16",
            float(params["rel_tol"]),
        )
        for row in measured["gamma"]:
            a.require(
                row["gamma"] <= row["full"] * (1 + 1e-12),
                f"restricted sum exceeds the coefficient at k={row['k']}",
            )

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        return {
            "picard_lower": lower_pin(measured["picard_min_over_log"]),
            "picard_r16": measured["picard_r16"],
        }


def _modes(entries: dict[tuple[int, int, int], complex], box: int) -> SpectralState:
    return SpectralState(WeightedSet.from_mapping(entries, WeightMode.NUMERIC), box)


def _distance(a: SpectralState, b: SpectralState) -> float:
    return float(np.sqrt(np.sum(np.abs(a.dense() - b.dense()) ** 2)))


class IntegratorCheck(AbstractCheck):
    name = "integrator"
    reference = "Strang split-step integrator for i u_t + box u = |u|^2 u"
    defaults = {
        "linear_tol": 1e-12,
        "mass_steps": 1000,
        "mass_tol": 1e-8,
        "contraction": 3.0,
    }

    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        rng = rng_for(seed)

        # linear flow multiplies each mode by exp(2 pi i t h)
        f = random_complex(rng, 20, 3)
        state = SpectralState(f, 3)
        steps, dt = 10, 1e-3
        out = splitstep_evolve(state, dt=dt, steps=steps, nonlinear=False)
        pts = f.points
        h = pts[:, 0] ** 2 - pts[:, 1] ** 2 - pts[:, 2] ** 2
        expected = f.numeric_weights() * np.exp(2j * np.pi * steps * dt * h)
        got = np.array(
            [complex(out.coefficients.weight_at(tuple(p))) for p in pts.tolist()]
        )
        linear_err = float(np.max(np.abs(got - expected)))

        # mass over a long run with weak data
        weak = _modes({(1, 0, 0): 0.1, (0, 1, 0): 0.1}, 8)
        rows = list(
            trajectory_diagnostics(
                weak, dt=1e-3, steps=int(params["mass_steps"]), every=100, grid=32
            )
        )
        mass0 = rows[0].mass
        drift = max(abs(r.mass - mass0) for r in rows) / mass0

        # dt halving against a fine reference
        data = _modes({(1, 0, 0): 0.3, (0, 1, 0): 0.2, (0, 0, 1): 0.1}, 4)
        T, dt = 0.08, 0.01
        ref = splitstep_evolve(data, dt=dt / 16, steps=128)
        e1 = _distance(splitstep_evolve(data, dt=dt, steps=8), ref)
        e2 = _distance(splitstep_evolve(data, dt=dt / 2, steps=16), ref)
        return {
            "linear_max_error": linear_err,
            "mass_drift": drift,
            "halving_errors": [e1, e2],
            "contraction": e1 / e2 if e2 > 0 else math.inf,
            "T": T,
        }

    def assess(self, measured, params, a: Assessment) -> None:
        a.within(
            "linear phase error",
            measured["linear_max_error"],
            0.0,
            float(params["linear_tol"]),
        )
        a.within(
            "relative mass drift",
            measured["mass_drift"],
            0.0,
            float(params["mass_tol"]),
        )
        a.require(
            measured["contraction"] >= float(params["contraction"]),
            f"dt halving contracts the error by {measured['contraction']:.3g} only",
        )
