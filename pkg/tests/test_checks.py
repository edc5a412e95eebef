import json
from pathlib import Path

import pytest

from hyperl4.checks.base import (
    AbstractCheck,
    Assessment,
    CheckStatus,
    lower_pin,
    upper_pin,
)
from hyperl4.checks.lattice_checks import ConeEnumerationCheck
from hyperl4.checks.resonance_checks import LineClosedFormCheck
from hyperl4.checks.strichartz_checks import CubeGoldenCheck, GoodBadCheck
from hyperl4.errors import BoundError
from hyperl4.utils.checks_resolver import (
    CHECK_REGISTRY,
    check_defaults,
    get_available_checks,
    resolve_checks,
)
from hyperl4.utils.config import GoldenStore

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
SMALL_CONE = {"compare_max_M": 16, "ratio_max_M": 32, "box_max_N": 4}


def _golden(tmp_path, values=None) -> GoldenStore:
    path = tmp_path / "golden.json"
    if values is not None:
        path.write_text(json.dumps(values), encoding="utf-8")
    return GoldenStore.load(path)


class _Raising(AbstractCheck):
    name = "raising"

    def measure(self, params, seed):
        raise BoundError("box too large")

    def assess(self, measured, params, a):
        pass


def test_registry_matches_shipped_golden_and_configs():
    assert len(CHECK_REGISTRY) == 20
    assert get_available_checks() == sorted(check_defaults())
    for name, cls in CHECK_REGISTRY.items():
        assert cls.name == name
        assert cls.reference


def test_hard_pins_are_in_the_shipped_golden():
    golden = GoldenStore.load(CONFIGS / "golden.json")
    assert golden.loaded
    for cls in CHECK_REGISTRY.values():
        for key, value in cls.hard_pins.items():
            assert golden.values[key] == value


def test_resolve_checks_skips_unknown(caplog):
    loaded = resolve_checks(["line_closed_form", "nope"])
    assert list(loaded) == ["line_closed_form"]
    assert isinstance(loaded["line_closed_form"], LineClosedFormCheck)
    assert "nope" in caplog.text


def test_assessment_pins(tmp_path):
    a = Assessment(_golden(tmp_path, {"C": 2, "D": None}))
    a.at_most("x", 1.5, "C")
    assert a.status() == CheckStatus.PASS and a.message() == "ok"
    a.at_most("x", 1.0, "D")
    assert a.status() == CheckStatus.SKIPPED
    a.at_least("y", 1.0, "C")
    assert a.status() == CheckStatus.FAIL
    assert "below C" in a.message()


def test_assessment_missing_golden(tmp_path):
    a = Assessment(_golden(tmp_path))
    a.matches("x", 1.0, "C", 1e-9)
    assert a.status() == CheckStatus.FAIL
    assert a.message().startswith("golden missing")
    b = Assessment(_golden(tmp_path, {}))
    b.equals("x", [1, 2], "C")
    assert b.message() == "golden missing: C"


def test_assessment_within_and_matches(tmp_path):
    a = Assessment(_golden(tmp_path, {"E": 10.0}))
    a.within("r", 0.5, 0.0, 1.0)
    a.matches("m", 10.0 + 1e-12, "E", 1e-9)
    assert a.status() == CheckStatus.PASS
    a.within("r", 2.0, 0.0, 1.0)
    assert a.status() == CheckStatus.FAIL


def test_line_closed_form_check_passes(tmp_path):
    result = LineClosedFormCheck().run({"max_N": 6}, 0, _golden(tmp_path, {}))
    assert result.status == CheckStatus.PASS
    assert result.measured == {"omega_mismatch_N": [], "omega1_nonzero_N": []}
    assert "execution_time" not in result.to_dict()
    assert "execution_time" in result.to_dict(include_timing=True)


def test_cone_check_against_shipped_pin():
    result = ConeEnumerationCheck().run(
        SMALL_CONE, 0, GoldenStore.load(CONFIGS / "golden.json")
    )
    assert result.status == CheckStatus.PASS, result.message
    assert result.measured["catalog_equal"]
    assert result.measured["max_ratio"] <= 8


def test_cone_check_without_golden_fails(tmp_path):
    result = ConeEnumerationCheck().run(SMALL_CONE, 0, _golden(tmp_path))
    assert result.status == CheckStatus.FAIL
    assert "golden missing" in result.message


def test_calibration_writes_hard_pins_only_when_absent(tmp_path):
    check = ConeEnumerationCheck()
    result = check.run(SMALL_CONE, 0, _golden(tmp_path, {}), calibrate=True)
    assert result.message == "calibrated"
    assert result.calibration == {"C_cone": 8}
    again = check.run(SMALL_CONE, 0, _golden(tmp_path, {"C_cone": 8}), calibrate=True)
    assert again.calibration == {}


def test_library_errors_become_error_status(tmp_path):
    result = _Raising().run({}, 0, _golden(tmp_path, {}))
    assert result.status == CheckStatus.ERROR
    assert result.message == "box too large"
    assert result.to_dict()["status"] == "error"


def test_pin_headroom():
    assert upper_pin(1.5) == 3.0
    assert lower_pin(1.5) == 0.75


@pytest.mark.slow
def test_cone_check_at_default_scale():
    check = ConeEnumerationCheck()
    result = check.run(
        dict(check.defaults), 0, GoldenStore.load(CONFIGS / "golden.json")
    )
    assert result.status == CheckStatus.PASS, result.message


def test_shipped_golden_has_no_null_pins():
    golden = GoldenStore.load(CONFIGS / "golden.json")
    assert not [k for k, v in golden.values.items() if v is None]


def test_cube_golden_check_against_shipped_golden():
    result = CubeGoldenCheck().run(
        {"N": 2, "profile_N": [1, 2], "oracle_max_N": 1, "rel_tol": 1e-12},
        0,
        GoldenStore.load(CONFIGS / "golden.json"),
    )
    assert result.status == CheckStatus.PASS, result.message
    assert result.measured["l4_fourth_power"] == pytest.approx(2014.078125)


@pytest.mark.slow
def test_good_bad_check_against_shipped_golden():
    check = GoodBadCheck()
    result = check.run(
        dict(check.defaults), 0, GoldenStore.load(CONFIGS / "golden.json")
    )
    assert result.status == CheckStatus.PASS, result.message
    assert result.measured["f_bad_off_planes"] == 0
