"""
hyperl4 - Command execution logic.

Every sub-command has a ``run_<command>(config)`` function that reads its
inputs, calls the library, writes ``<output>/<command>.json`` (plus CSV files
where the command produces tables) and returns the summary that the printers
show. Outputs carry the RunConfig and no timestamps, so identical runs give
byte-identical files.
"""

import json
import logging
import math
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from hyperl4 import printers
from hyperl4.arithmetic_oracles import (
    ParabolaQuery,
    count_parabola_points,
    count_parabola_points_naive,
    parabola_bound_scan,
    slice_plane_size,
)
from hyperl4.checks.base import CheckResult, CheckStatus
from hyperl4.errors import BoundError
from hyperl4.hnls_lab import (
    SpectralState,
    critical_regularity,
    gamma_lower_sum,
    illposed_hs_norm_sq,
    picard_ratio,
    trajectory_diagnostics,
)
from hyperl4.incidence_geometry import (
    GreatCircle,
    PlanarLine,
    ProjectivePoint,
    count_incidences_point_line,
    count_incidences_point_line_naive,
    count_incidences_sphere,
    count_incidences_sphere_projected,
    rich_lines,
    rich_lines_bound,
    szemeredi_trotter_bound,
)
from hyperl4.lattice_core import (
    LatticePoint,
    Plane,
    cone_count_box,
    cone_m,
    enumerate_cone_irr,
)
from hyperl4.resonance_count import (
    bilinear_l2,
    error_part,
    heavy_planes,
    omega_of,
    omega_oracle,
    slice_A,
    to_jsonable,
    work_budget,
)
from hyperl4.strichartz_lab import (
    ExtremizerSpec,
    atomic_decomposition,
    extremizer,
    good_bad_split,
    l4_fourth_power,
    l4_quadrature,
    scaling_exponent,
)
from hyperl4.utils.checks_resolver import check_defaults, resolve_checks
from hyperl4.utils.config import GoldenStore, derive_seed, load_suite_config
from hyperl4.utils.logger import setup_logging
from hyperl4.utils.pointset_io import (
    read_integer_table,
    read_pointset,
    write_pointset,
    write_rows,
)
from hyperl4.weighted_set import WeightedSet, WeightMode

DEFAULT_OUTPUT = Path("output")


@dataclass
class RunConfig:
    """Everything a run depends on besides its input files."""

    command: str
    output: Path
    inputs: dict[str, Path] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    mode: str = "auto"
    seed: int = 0
    jobs: int = 1
    budget: int | None = None
    log_level: str = "INFO"

    def weight_mode(self) -> WeightMode | None:
        return None if self.mode == "auto" else WeightMode(self.mode)

    def kernel_kwargs(self) -> dict[str, Any]:
        return {"budget": self.resolved_budget(), "jobs": self.jobs}

    def resolved_budget(self) -> int:
        return work_budget() if self.budget is None else self.budget

    def to_dict(self) -> dict:
        """Convert RunConfig to a dictionary for JSON serialization."""
        return {
            "command": self.command,
            "output": str(self.output),
            "inputs": {k: str(v) for k, v in sorted(self.inputs.items())},
            "params": to_jsonable(self.params),
            "mode": self.mode,
            "seed": self.seed,
            "jobs": self.jobs,
            "budget": self.resolved_budget(),
        }


def ensure_dir(path: Path) -> None:
    """Create directory path if it doesn't exist (parents included)."""
    path.mkdir(parents=True, exist_ok=True)


def write_json(path: Path, payload: dict) -> None:
    ensure_dir(path.parent)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_jsonable(payload), f, indent=2, ensure_ascii=False)
        f.write("\n")


def _finish(
    config: RunConfig,
    result: dict,
    headline: dict,
    files: list[Path] | None = None,
    ok: bool = True,
) -> dict:
    """Write <command>.json and build the console summary."""
    json_path = config.output / f"{config.command}.json"
    write_json(json_path, {"run": config.to_dict(), **result})
    logging.info(f"Results written to: {json_path}")
    return {
        "command": config.command,
        "output_directory": str(config.output),
        "headline": headline,
        "files": [str(json_path), *(str(p) for p in files or [])],
        "ok": ok,
    }


def _load(config: RunConfig, key: str = "input") -> WeightedSet:
    f = read_pointset(config.inputs[key], config.weight_mode())
    logging.info(
        "Loaded %d points (%s) from %s", len(f), f.mode.value, config.inputs[key]
    )
    return f


def _agree(a: Any, b: Any) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(complex(a) - complex(b)) <= 1e-9 * max(1.0, abs(complex(b)))


def _points_csv(path: Path, points: list[LatticePoint]) -> None:
    write_rows(path, ["x", "y", "z"], (p.as_tuple() for p in points))


# Resonance counts


def run_count(config: RunConfig) -> dict:
    f = _load(config)
    report = omega_of(f, **config.kernel_kwargs())
    result: dict[str, Any] = {
        "size": len(f),
        "l2_norm_sq": f.l2_norm_sq(),
        "report": report.to_dict(),
    }
    headline = {
        "points": len(f),
        "omega": report.omega,
        "omega1": report.omega1,
        "omega2": report.omega2,
    }
    ok = True
    if config.params.get("oracle"):
        slow = omega_oracle(f, f, f, f)
        ok = all(
            _agree(x, y)
            for x, y in (
                (report.omega, slow.omega),
                (report.omega1, slow.omega1),
                (report.omega2, slow.omega2),
            )
        )
        result["oracle"] = slow.to_dict()
        result["oracle_agrees"] = ok
        headline["oracle_agrees"] = ok
        if not ok:
            logging.error("Bucketed count disagrees with the oracle")
    return _finish(config, result, headline, ok=ok)


def run_slice(config: RunConfig) -> dict:
    a = LatticePoint.of(config.params["a"])
    b, N = int(config.params["b"]), int(config.params["N"])
    csv_path = config.output / "slice.csv"
    plane_eq = config.params.get("plane")
    if plane_eq is None:
        points = slice_A(a, b, N)
        result = {"a": list(a.as_tuple()), "b": b, "N": N, "count": len(points)}
        headline = {"count": len(points)}
    else:
        plane = Plane.from_equation(plane_eq[:3], plane_eq[3])
        report = slice_plane_size(a, b, plane, N)
        points = report.points
        result = {
            "a": list(a.as_tuple()),
            "b": b,
            "plane": plane.to_dict(),
            **report.to_dict(),
        }
        headline = {
            "count": report.count,
            "case": report.case.value,
            "ratio": report.ratio,
        }
    _points_csv(csv_path, points)
    return _finish(config, result, headline, [csv_path])


def run_heavy_planes(config: RunConfig) -> dict:
    f = _load(config)
    M = int(config.params["M"])
    planes = heavy_planes(f, M)
    rest = error_part(f, M)
    rows = []
    for plane in planes:
        on = int((plane.values(f.points) == plane.offset).sum()) if len(f) else 0
        rows.append({**plane.to_dict(), "points": on})
    csv_path = config.output / "error_part.csv"
    write_pointset(csv_path, rest)
    result = {
        "M": M,
        "size": len(f),
        "heavy_planes": rows,
        "error_part_size": len(rest),
    }
    headline = {"heavy_planes": len(planes), "error_part_size": len(rest)}
    return _finish(config, result, headline, [csv_path])


def run_bilinear(config: RunConfig) -> dict:
    g1, g2 = _load(config, "input"), _load(config, "input2")
    value = bilinear_l2(g1, g2)
    denom = float(g1.l2_norm_sq()) * float(g2.l2_norm_sq())
    ratio = float(value) / denom if denom else 0.0
    result = {
        "sizes": [len(g1), len(g2)],
        "bilinear_l2_sq": value,
        "ratio_to_l2_product": ratio,
    }
    return _finish(config, result, {"bilinear_l2_sq": value, "ratio": ratio})


# Incidence geometry


def run_incidence(config: RunConfig) -> dict:
    points = read_integer_table(config.inputs["points"], ("x", "y"))
    lines = [
        PlanarLine.of(A, B, C)
        for A, B, C in read_integer_table(config.inputs["lines"], ("A", "B", "C"))
    ]
    n, m = len(set(points)), len(set(lines))
    count = count_incidences_point_line(points, lines)
    bound = szemeredi_trotter_bound(n, m)
    result = {
        "points": n,
        "lines": m,
        "incidences": count,
        "bound": bound,
        "ratio": count / bound if bound else 0.0,
    }
    ok = True
    if config.params.get("oracle"):
        naive = count_incidences_point_line_naive(points, lines)
        ok = naive == count
        result["oracle"] = naive
    headline = {"incidences": count, "ratio": result["ratio"]}
    return _finish(config, result, headline, ok=ok)


def run_rich_lines(config: RunConfig) -> dict:
    points = read_integer_table(config.inputs["points"], ("x", "y", "z"))
    k = int(config.params["k"])
    found = rich_lines(points, k)
    n = len(set(points))
    incidences = sum(r.count for r in found)
    bound = rich_lines_bound(n, k)
    csv_path = config.output / "rich_lines.csv"
    write_rows(
        csv_path,
        ["dx", "dy", "dz", "bx", "by", "bz", "count"],
        (
            (*r.line.direction.as_tuple(), *r.line.base.as_tuple(), r.count)
            for r in found
        ),
    )
    result = {
        "points": n,
        "k": k,
        "lines": len(found),
        "incidences": incidences,
        "bound": bound,
        "ratio": incidences / bound if bound else 0.0,
        "rich_lines": [r.to_dict() for r in found],
    }
    headline = {"lines": len(found), "incidences": incidences}
    return _finish(config, result, headline, [csv_path])


def run_sphere_incidence(config: RunConfig) -> dict:
    points = [
        ProjectivePoint.of(row)
        for row in read_integer_table(config.inputs["points"], ("x", "y", "z"))
        if any(row)
    ]
    circles = [
        GreatCircle.of(row)
        for row in read_integer_table(config.inputs["circles"], ("a", "b", "c"))
        if any(row)
    ]
    direct = count_incidences_sphere(points, circles)
    projected, per_piece = count_incidences_sphere_projected(points, circles)
    n, m = len(set(points)), len(set(circles))
    bound = szemeredi_trotter_bound(n, m)
    result = {
        "points": n,
        "circles": m,
        "incidences": direct,
        "projected": projected,
        "per_piece": [
            {"axis": axis, "sign": sign, "incidences": c}
            for (axis, sign), c in sorted(per_piece.items())
        ],
        "bound": bound,
        "ratio": direct / bound if bound else 0.0,
    }
    ok = direct == projected
    if not ok:
        logging.error("Chart-wise count %d differs from %d", projected, direct)
    return _finish(config, result, {"incidences": direct, "projected": projected}, ok=ok)


# Lattice and arithmetic


def run_cone_enum(config: RunConfig) -> dict:
    M = int(config.params["M"])
    catalog = enumerate_cone_irr(M, config.params.get("method", "parametrized"))
    csv_path = config.output / "cone.csv"
    _points_csv(csv_path, list(catalog.points))
    result: dict[str, Any] = {
        "M": M,
        "method": config.params.get("method", "parametrized"),
        "count": len(catalog),
        "ratio": catalog.ratio(),
        "normals": len(catalog.normals()),
    }
    box = config.params.get("box")
    if box is not None:
        box = int(box)
        in_box = cone_m(M, box)
        result["box"] = {
            "N": box,
            "cone_points": cone_count_box(box),
            "cone_m_points": len(in_box),
        }
    headline = {"count": len(catalog), "ratio": catalog.ratio()}
    return _finish(config, result, headline, [csv_path])


def run_parabola(config: RunConfig) -> dict:
    p = config.params
    if p.get("scan"):
        scan = parabola_bound_scan(
            int(p["q_max"]), int(p["N_max"]), int(p["trials"]), config.seed
        )
        result = {"scan": scan.to_dict()}
        return _finish(config, result, {"max_ratio": scan.max_ratio})
    query = ParabolaQuery(int(p["q"]), int(p["omega"]), int(p["N"]))
    count = count_parabola_points(query)
    result = {
        **query.to_dict(),
        "count": count,
        "bound": query.bound(),
        "ratio": count / query.bound(),
    }
    ok = True
    if p.get("oracle"):
        naive = count_parabola_points_naive(query)
        result["oracle"] = naive
        ok = naive == count
    return _finish(config, result, {"count": count, "ratio": result["ratio"]}, ok=ok)


# Strichartz norms


def run_extremizer(config: RunConfig) -> dict:
    spec = ExtremizerSpec(config.params["kind"], int(config.params["N"]))
    f = extremizer(spec)
    csv_path = config.output / "extremizer.csv"
    write_pointset(csv_path, f)
    result = {"spec": spec.to_dict(), "size": len(f), "l2_norm": f.l2_norm()}
    return _finish(config, result, {"size": len(f)}, [csv_path])


def run_l4(config: RunConfig) -> dict:
    f = _load(config)
    N = config.params.get("N") or max(1, f.max_abs_coord())
    if f.max_abs_coord() > N:
        raise BoundError(f"Support is not inside [-{N},{N}]^3")
    fourth = l4_fourth_power(f, **config.kernel_kwargs())
    norm = max(float(fourth), 0.0) ** 0.25
    l2 = f.l2_norm()
    result: dict[str, Any] = {
        "size": len(f),
        "N": N,
        "l4_fourth_power": fourth,
        "l4_norm": norm,
        "l2_norm": l2,
        "main_ratio": norm / (N**0.25 * l2) if l2 else 0.0,
        "diam_ratio": norm / (max(f.diam(), 1.0) ** 0.25 * l2) if l2 else 0.0,
    }
    ok = True
    if config.params.get("quadrature"):
        grid = l4_quadrature(f, oversample=2)
        result["quadrature"] = grid
        ok = math.isclose(grid, float(fourth), rel_tol=1e-6, abs_tol=1e-9)
    headline = {"l4_norm": norm, "main_ratio": result["main_ratio"]}
    return _finish(config, result, headline, ok=ok)


def run_scaling(config: RunConfig) -> dict:
    fit = scaling_exponent(
        config.params["kind"],
        config.params["N_list"],
        config.params.get("p", 4),
        **config.kernel_kwargs(),
    )
    csv_path = config.output / "scaling.csv"
    write_rows(
        csv_path, ["N", "norm", "ratio"], ((pt.N, pt.norm, pt.ratio) for pt in fit.points)
    )
    headline = {"slope": fit.slope, "stderr": fit.stderr, "predicted": fit.predicted}
    return _finish(config, {"fit": fit.to_dict()}, headline, [csv_path])


def run_decompose(config: RunConfig) -> dict:
    f = _load(config)
    dec = atomic_decomposition(f)
    result = {"size": len(f), **dec.to_dict()}
    return _finish(config, result, {"blocks": len(dec.blocks), "j_max": dec.j_max})


def run_good_bad(config: RunConfig) -> dict:
    f = _load(config)
    N = config.params.get("N") or max(1, f.max_abs_coord())
    split = good_bad_split(
        f,
        N,
        float(config.params["delta"]),
        float(config.params["c_threshold"]),
        **config.kernel_kwargs(),
    )
    csv_path = config.output / "f_bad.csv"
    write_pointset(csv_path, split.f_bad)
    headline = {
        "good_blocks": len(split.good_blocks),
        "bad_blocks": len(split.bad_blocks),
        "dominates": split.dominates,
    }
    return _finish(config, split.to_dict(), headline, [csv_path], ok=split.dominates)


# Nonlinear equation


def run_illposed(config: RunConfig) -> dict:
    p = config.params
    N, s, k = int(p["N"]), float(p["s"]), int(p["k"])
    hs_sq = illposed_hs_norm_sq(N, s)
    ratio = picard_ratio(N)
    result = {
        "N": N,
        "s": s,
        "hs_norm_sq": hs_sq,
        "picard_ratio": ratio,
        "picard_over_log": ratio / math.log(N) if N > 1 else None,
        "regularity": critical_regularity(k).to_dict(),
        "gamma": [
            {"k": int(g), "gamma": gamma_lower_sum(int(g), N)}
            for g in p.get("gamma_k", [])
        ],
    }
    headline = {"hs_norm_sq": hs_sq, "picard_ratio": ratio}
    return _finish(config, result, headline)


def run_evolve(config: RunConfig) -> dict:
    p = config.params
    f = _load(config)
    state = SpectralState.from_weighted(f, p.get("box"))
    rows = []

    def stream():
        for row in trajectory_diagnostics(
            state,
            k=int(p["k"]),
            sign=int(p["sign"]),
            dt=float(p["dt"]),
            steps=int(p["steps"]),
            every=int(p["every"]),
            grid=p.get("grid"),
            nonlinear=not p.get("linear", False),
        ):
            rows.append(row)
            yield row.as_row()

    csv_path = config.output / "evolve.csv"
    write_rows(csv_path, ["t", "mass", "h_half"], stream())
    first, last = rows[0], rows[-1]
    drift = abs(last.mass - first.mass) / first.mass if first.mass else 0.0
    result = {
        "box": state.box,
        "rows": len(rows),
        "initial": {"t": first.t, "mass": first.mass, "h_half": first.h_half},
        "final": {"t": last.t, "mass": last.mass, "h_half": last.h_half},
        "relative_mass_drift": drift,
    }
    return _finish(config, result, {"rows": len(rows), "mass_drift": drift}, [csv_path])


# Acceptance suite


def _run_one_check(
    name: str,
    params: dict,
    seed: int,
    golden_path: Path,
    output: Path,
    log_level: str,
    file_logging: bool,
    calibrate: bool,
    in_worker: bool,
) -> CheckResult:
    """Run one check and return its result.

    Top-level (picklable) so it can be dispatched via ProcessPoolExecutor.
    Workers log to checks/<name>.log instead of the console.
    """
    if in_worker:
        setup_logging(
            log_level,
            output / "checks",
            file_logging=file_logging,
            log_filename=f"{name}.log",
            console=False,
        )
    logging.info("=" * 80)
    logging.info("Running check: %s (seed %d)", name, seed)
    logging.info("=" * 80)
    check = resolve_checks([name])[name]
    return check.run(params, seed, GoldenStore.load(golden_path), calibrate)


_STATUS_RANK = {
    CheckStatus.ERROR: 0,
    CheckStatus.FAIL: 1,
    CheckStatus.SKIPPED: 2,
    CheckStatus.PASS: 3,
}


def _sort_results(results: list[CheckResult]) -> list[CheckResult]:
    """Order results by (status, name) so serial/parallel runs diff cleanly."""
    return sorted(results, key=lambda r: (_STATUS_RANK[r.status], r.name))


def run_suite(config: RunConfig) -> dict:
    suite = load_suite_config(config.inputs["config"], check_defaults())
    app = suite.app
    calibrate = bool(config.params.get("calibrate"))
    seed = config.params.get("seed")
    seed = app.seed if seed is None else int(seed)
    jobs = config.params.get("jobs") or app.jobs
    golden = GoldenStore.load(app.golden)
    if not golden.loaded and not calibrate:
        logging.warning("Golden file not found: %s", app.golden)

    enabled = suite.enabled()
    jobs = max(1, min(jobs, len(enabled)))
    logging.info(
        "Running %d checks with %d workers%s",
        len(enabled),
        jobs,
        " (calibration)" if calibrate else "",
    )
    tasks = [
        (c.name, dict(c.params), derive_seed(seed, c.name)) for c in enabled
    ]
    results: list[CheckResult] = []
    if jobs == 1:
        for idx, (name, params, check_seed) in enumerate(tasks, 1):
            logging.info("[%d/%d] %s", idx, len(tasks), name)
            results.append(
                _run_one_check(
                    name,
                    params,
                    check_seed,
                    app.golden,
                    config.output,
                    app.log_level,
                    app.file_logging,
                    calibrate,
                    in_worker=False,
                )
            )
    else:
        ctx = mp.get_context("spawn")
        with ProcessPoolExecutor(max_workers=jobs, mp_context=ctx) as ex:
            futures = {
                ex.submit(
                    _run_one_check,
                    name,
                    params,
                    check_seed,
                    app.golden,
                    config.output,
                    app.log_level,
                    app.file_logging,
                    calibrate,
                    True,
                ): name
                for name, params, check_seed in tasks
            }
            for done, fut in enumerate(as_completed(futures), 1):
                name = futures[fut]
                try:
                    result = fut.result()
                except Exception as exc:  # noqa: BLE001
                    logging.error("[%d/%d] ✗ %s: %s", done, len(tasks), name, exc)
                    result = CheckResult(
                        name=name,
                        status=CheckStatus.ERROR,
                        message=f"worker failed: {exc}",
                        reference="",
                        execution_time=0.0,
                    )
                symbol = "✓" if result.status == CheckStatus.PASS else "✗"
                logging.info("[%d/%d] %s %s", done, len(tasks), symbol, name)
                results.append(result)

    results = _sort_results(results)
    if calibrate:
        updates: dict[str, Any] = {}
        for r in results:
            updates.update(r.calibration)
        golden.write(to_jsonable(updates))
        logging.info("Wrote %d golden values to %s", len(updates), golden.path)

    totals = {s.value: sum(r.status == s for r in results) for s in CheckStatus}
    ok = totals[CheckStatus.FAIL.value] == 0 and totals[CheckStatus.ERROR.value] == 0
    result = {
        "suite": suite.to_dict(),
        "seed": seed,
        "calibrate": calibrate,
        "golden": {"path": str(golden.path), "loaded": golden.loaded},
        "totals": totals,
        "checks": [r.to_dict() for r in results],
    }
    summary = _finish(config, result, totals, ok=ok)
    summary["checks"] = [r.to_dict(include_timing=True) for r in results]
    return summary


COMMANDS: dict[str, Callable[[RunConfig], dict]] = {
    "count": run_count,
    "slice": run_slice,
    "heavy-planes": run_heavy_planes,
    "incidence": run_incidence,
    "rich-lines": run_rich_lines,
    "sphere-incidence": run_sphere_incidence,
    "cone-enum": run_cone_enum,
    "parabola": run_parabola,
    "extremizer": run_extremizer,
    "l4": run_l4,
    "scaling": run_scaling,
    "decompose": run_decompose,
    "good-bad": run_good_bad,
    "bilinear": run_bilinear,
    "illposed": run_illposed,
    "evolve": run_evolve,
    "suite": run_suite,
}


def run_command(config: RunConfig) -> dict:
    """Dispatch to run_<command>, print the summary and return it."""
    ensure_dir(config.output)
    logging.info(f"hyperl4 {config.command}: output in {config.output}")
    summary = COMMANDS[config.command](config)
    if config.command == "suite":
        printers.print_suite_summary(summary)
    else:
        printers.print_command_summary(summary)
    return summary
