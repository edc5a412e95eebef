import json

import pytest

from hyperl4.core import RunConfig, run_command
from hyperl4.lattice_core import LatticePoint, enumerate_cone_irr
from hyperl4.main import main
from hyperl4.resonance_count import slice_A
from hyperl4.utils.checks_resolver import check_defaults

LINE3 = ["x,y,z,w_re", "1,1,0,1", "2,2,0,1", "3,3,0,1"]


def _json(config: RunConfig) -> dict:
    return json.loads((config.output / f"{config.command}.json").read_text())


def _run(tmp_path, command, inputs=None, **params) -> tuple[dict, dict]:
    config = RunConfig(command, tmp_path / "out", inputs or {}, params)
    summary = run_command(config)
    return summary, _json(config)


def test_count_with_oracle(tmp_path, write_csv):
    path = write_csv("line3.csv", LINE3)
    summary, data = _run(tmp_path, "count", {"input": path}, oracle=True)
    assert summary["ok"]
    assert data["report"]["omega"] == 19
    assert data["report"]["omega1"] == 0
    assert data["oracle_agrees"]
    assert data["run"]["inputs"] == {"input": str(path)}


def test_outputs_are_reproducible(tmp_path, write_csv):
    path = write_csv("line3.csv", LINE3)
    config = RunConfig("count", tmp_path / "out", {"input": path})
    run_command(config)
    first = (config.output / "count.json").read_bytes()
    run_command(config)
    assert (config.output / "count.json").read_bytes() == first
    assert b"execution_time" not in first


def test_slice_writes_points(tmp_path):
    summary, data = _run(tmp_path, "slice", a=(2, 0, 0), b=0, N=3)
    expected = slice_A(LatticePoint(2, 0, 0), 0, 3)
    assert data["count"] == len(expected)
    rows = (tmp_path / "out" / "slice.csv").read_text().splitlines()
    assert rows[0] == "x,y,z"
    assert len(rows) == len(expected) + 1


def test_cone_enum(tmp_path):
    _, data = _run(tmp_path, "cone-enum", M=10, method="bruteforce", box=3)
    assert data["count"] == len(enumerate_cone_irr(10))
    assert data["box"]["N"] == 3


def test_parabola_query_and_scan(tmp_path):
    summary, data = _run(tmp_path, "parabola", q=1, omega=0, N=4, oracle=True)
    assert summary["ok"]
    assert data["count"] == data["oracle"] == 5
    _, data = _run(tmp_path, "parabola", scan=True, q_max=10, N_max=100, trials=5)
    assert 25 <= data["scan"]["queries"] <= 30


def test_extremizer_then_l4(tmp_path):
    _run(tmp_path, "extremizer", kind="line", N=3)
    csv = tmp_path / "out" / "extremizer.csv"
    assert csv.is_file()
    summary, data = _run(tmp_path, "l4", {"input": csv}, quadrature=True)
    assert summary["ok"]
    assert data["N"] == 3
    assert data["l4_fourth_power"] == pytest.approx(19 / 9)


def test_decompose_characteristic_function(tmp_path, write_csv):
    path = write_csv("line3.csv", LINE3)
    summary, _ = _run(tmp_path, "decompose", {"input": path})
    assert summary["headline"] == {"blocks": 2, "j_max": 1}


def test_incidence_grid(tmp_path, write_csv):
    points = write_csv(
        "points.csv", ["x,y"] + [f"{x},{y}" for x in range(3) for y in range(3)]
    )
    lines = write_csv("lines.csv", ["A,B,C", "1,0,0", "1,0,-1", "1,0,-2", "1,-1,0"])
    summary, data = _run(
        tmp_path, "incidence", {"points": points, "lines": lines}, oracle=True
    )
    assert summary["ok"]
    assert data["incidences"] == data["oracle"] == 12


def test_rich_lines_grid(tmp_path, write_csv):
    points = write_csv(
        "points.csv", ["x,y,z"] + [f"{x},{y},0" for x in range(4) for y in range(4)]
    )
    _, data = _run(tmp_path, "rich-lines", {"points": points}, k=4)
    assert data["lines"] == 10
    assert data["incidences"] == 40


def test_sphere_incidence_frame(tmp_path, write_csv):
    axes = ["1,0,0", "0,1,0", "0,0,1"]
    points = write_csv("dirs.csv", ["x,y,z", *axes])
    circles = write_csv("circles.csv", ["a,b,c", *axes])
    summary, data = _run(
        tmp_path, "sphere-incidence", {"points": points, "circles": circles}
    )
    assert summary["ok"]
    assert data["incidences"] == data["projected"] == 6


def _exit_code(argv) -> int:
    with pytest.raises(SystemExit) as exc:
        main(argv)
    return exc.value.code


def test_main_exit_codes(tmp_path, write_csv):
    good = write_csv("line3.csv", LINE3)
    bad = write_csv("bad.csv", ["x,y,z,w_re", "1,1,0"])
    out = ["--output", str(tmp_path / "out")]
    assert _exit_code(["count", "-i", str(good), "--oracle", *out]) == 0
    assert _exit_code(["count", "-i", str(bad), *out]) == 2
    assert _exit_code(["count", "-i", str(good), "--budget", "1", *out]) == 3
    assert _exit_code(["count", "-i", str(tmp_path / "nope.csv"), *out]) == 2


def _suite_file(tmp_path, golden: str) -> str:
    lines = [
        "[app]",
        'log_level = "INFO"',
        f'output = "{tmp_path / "suite"}"',
        "file_logging = false",
        "seed = 1",
        "jobs = 1",
        f'golden = "{golden}"',
    ]
    for name in sorted(check_defaults()):
        lines.append(f"[checks.{name}]")
        if name == "line_closed_form":
            lines.append("max_N = 4")
        else:
            lines.append("enabled = false")
    path = tmp_path / "suite.toml"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


def test_suite_run_and_calibration(tmp_path):
    golden = tmp_path / "golden.json"
    golden.write_text("{}\n", encoding="utf-8")
    config = _suite_file(tmp_path, str(golden))
    assert _exit_code(["suite", "-c", config]) == 0
    data = json.loads((tmp_path / "suite" / "suite.json").read_text())
    assert data["totals"]["pass"] == 1
    assert [c["name"] for c in data["checks"]] == ["line_closed_form"]
    assert "execution_time" not in data["checks"][0]
    assert _exit_code(["suite", "-c", config, "--calibrate"]) == 0
    assert json.loads(golden.read_text()) == {}


def test_suite_with_missing_config_exits_2(tmp_path):
    assert _exit_code(["suite", "-c", str(tmp_path / "none.toml")]) == 2


def test_count_two_points(tmp_path, write_csv):
    path = write_csv("two.csv", ["x,y,z,w_re", "0,0,0,1", "3,1,2,1"])
    _, data = _run(tmp_path, "count", {"input": path})
    assert data["report"]["omega"] == 6
    assert data["report"]["omega1"] == 0


def test_scaling_line_family(tmp_path):
    summary, data = _run(tmp_path, "scaling", kind="line", N_list=[8, 16, 32, 64])
    assert summary["headline"]["slope"] == pytest.approx(0.25, abs=0.02)
    rows = (tmp_path / "out" / "scaling.csv").read_text().splitlines()
    assert rows[0] == "N,norm,ratio"
    assert len(rows) == 5
