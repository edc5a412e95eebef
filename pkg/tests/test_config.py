import json
from pathlib import Path

import pytest

from hyperl4.errors import ConfigError
from hyperl4.utils.checks_resolver import check_defaults
from hyperl4.utils.config import (
    GoldenStore,
    derive_seed,
    load_suite_config,
    splitmix64,
)

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

APP = """
[app]
log_level = "info"
output = "./out"
file_logging = false
seed = 7
jobs = 1
golden = "golden.json"
"""


def _write(tmp_path, text: str) -> Path:
    path = tmp_path / "suite.toml"
    path.write_text(text, encoding="utf-8")
    return path


def test_splitmix64_known_value():
    # first output of splitmix64 seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_derive_seed_is_deterministic_per_name():
    assert derive_seed(1, "bilinear") == derive_seed(1, "bilinear")
    assert derive_seed(1, "bilinear") != derive_seed(1, "incidence")
    assert derive_seed(1, "bilinear") != derive_seed(2, "bilinear")
    assert 0 <= derive_seed(-5, "x") < 1 << 64


@pytest.mark.parametrize("name", ["suite_default.toml", "suite_quick.toml"])
def test_shipped_configs_load(name):
    suite = load_suite_config(CONFIGS / name, check_defaults())
    assert suite.app.golden == CONFIGS / "golden.json"
    assert {c.name for c in suite.checks} == set(check_defaults())
    assert suite.enabled()


def test_quick_config_disables_expensive_checks():
    suite = load_suite_config(CONFIGS / "suite_quick.toml", check_defaults())
    disabled = {c.name for c in suite.checks if not c.enabled}
    assert {"scaling_cube", "scaling_product", "main_estimate"} <= disabled


def test_defaults_fill_missing_parameters(tmp_path):
    path = _write(tmp_path, APP + "\n[checks.line_closed_form]\nmax_N = 3\n")
    suite = load_suite_config(path, check_defaults())
    assert suite.app.log_level == "INFO"
    assert suite.app.golden == tmp_path / "golden.json"
    by_name = {c.name: c for c in suite.checks}
    assert by_name["line_closed_form"].params["max_N"] == 3
    assert dict(by_name["bilinear"].params) == check_defaults()["bilinear"]


@pytest.mark.parametrize(
    "text",
    [
        "[checks.line_closed_form]\nmax_N = 3\n",
        APP.replace("jobs = 1", "jobs = 0"),
        APP.replace('"info"', '"loud"'),
        APP.replace("seed = 7", ""),
        APP + "\nextra_key = 1\n",
        APP + "\n[checks.no_such_check]\n",
        APP + "\n[checks.line_closed_form]\nmax_M = 3\n",
        APP + "\n[other]\n",
        APP + "\n[checks\n",
    ],
)
def test_invalid_configs(tmp_path, text):
    with pytest.raises(ConfigError):
        load_suite_config(_write(tmp_path, text), check_defaults())


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_suite_config(tmp_path / "absent.toml", check_defaults())


def test_golden_store_round_trip(tmp_path):
    store = GoldenStore.load(tmp_path / "golden.json")
    assert not store.loaded
    store.write({"b": 2, "a": None})
    assert store.loaded
    again = GoldenStore.load(tmp_path / "golden.json")
    assert again.values == {"a": None, "b": 2}
    again.write({"c": 1.5})
    text = (tmp_path / "golden.json").read_text()
    assert list(json.loads(text)) == ["a", "b", "c"]


def test_golden_store_rejects_bad_files(tmp_path):
    path = tmp_path / "golden.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        GoldenStore.load(path)
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        GoldenStore.load(path)
