import argparse
from pathlib import Path

import pytest

from hyperl4.cli import int_list, int_tuple, parse_args, to_run_config
from hyperl4.core import DEFAULT_OUTPUT

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def line_csv(write_csv):
    return write_csv("line.csv", ["x,y,z,w_re", "1,1,0,1", "2,2,0,1"])


def test_int_list_and_tuple():
    assert int_list("8, 16,32,") == [8, 16, 32]
    assert int_tuple(3)("1,-2,3") == (1, -2, 3)
    with pytest.raises(argparse.ArgumentTypeError):
        int_list("1,x")
    with pytest.raises(argparse.ArgumentTypeError):
        int_tuple(4)("1,2,3")


def test_count_arguments(line_csv):
    args = parse_args(["count", "--input", str(line_csv), "--oracle", "--seed", "3"])
    config = to_run_config(args)
    assert config.command == "count"
    assert config.inputs == {"input": line_csv}
    assert config.params == {"oracle": True}
    assert config.seed == 3
    assert config.jobs == 1
    assert config.output == DEFAULT_OUTPUT


def test_threads_env_sets_default_jobs(monkeypatch, line_csv):
    monkeypatch.setenv("HYPERL4_THREADS", "3")
    assert parse_args(["count", "-i", str(line_csv)]).jobs == 3
    monkeypatch.setenv("HYPERL4_THREADS", "many")
    assert parse_args(["count", "-i", str(line_csv)]).jobs is None


def test_jobs_below_one_are_clamped(line_csv):
    assert parse_args(["count", "-i", str(line_csv), "--jobs", "0"]).jobs == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["count", "--input", "missing.csv"],
        ["extremizer", "--kind", "sphere", "--N", "3"],
        ["scaling", "--kind", "line", "--N-list", "8,16,32,64", "--p", "6"],
        ["scaling", "--kind", "line", "--N-list", "8,16,16,32"],
        ["parabola", "--q", "3"],
        ["illposed", "--N", "0"],
        ["slice", "--a", "1,2", "--b", "0", "--N", "3"],
        ["cone-enum", "--M", "4", "--budget", "0"],
    ],
)
def test_invalid_arguments_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == 2


@pytest.mark.parametrize(
    "extra",
    [
        ["rich-lines", "--points", "{csv}", "--k", "1"],
        ["good-bad", "-i", "{csv}", "--delta", "0.25"],
        ["evolve", "-i", "{csv}", "--dt", "0"],
        ["evolve", "-i", "{csv}", "--every", "0"],
    ],
)
def test_invalid_options_with_inputs_exit_2(extra, line_csv):
    argv = [str(line_csv) if a == "{csv}" else a for a in extra]
    with pytest.raises(SystemExit) as exc:
        parse_args(argv)
    assert exc.value.code == 2


def test_parabola_scan_needs_no_query():
    args = parse_args(["parabola", "--scan", "--trials", "10"])
    params = to_run_config(args).params
    assert params["scan"] and params["trials"] == 10
    assert params["q"] is None


def test_suite_takes_output_from_config():
    config_path = CONFIGS / "suite_quick.toml"
    args = parse_args(["suite", "--config", str(config_path), "--jobs", "1"])
    config = to_run_config(args)
    assert config.output == Path("./output/suite_quick")
    assert config.inputs == {"config": config_path}
    assert config.params["jobs"] == 1
    assert config.params["seed"] is None
    assert not config.params["calibrate"]


def test_suite_output_flag_wins(tmp_path):
    args = parse_args(
        ["suite", "-c", str(CONFIGS / "suite_quick.toml"), "-o", str(tmp_path)]
    )
    assert to_run_config(args).output == tmp_path
