"""
Base classes for the acceptance checks run by ``hyperl4 suite``.

A check measures a set of quantities on a seeded corpus and then judges them
against hard limits and against constants pinned in the golden file.
Calibration runs the measurement only and proposes golden values.
"""

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Mapping

from hyperl4.errors import Hyperl4Error
from hyperl4.resonance_count import to_jsonable
from hyperl4.utils.config import GoldenStore

# Pinned constants get this factor of room when calibrated.
HEADROOM = 2.0


class CheckStatus(StrEnum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"
    ERROR = "error"


@dataclass
class CheckResult:
    """Outcome of one check, as written to suite.json."""

    name: str
    status: CheckStatus
    message: str
    reference: str
    execution_time: float
    measured: dict[str, Any] = field(default_factory=dict)
    calibration: dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "name": self.name,
            "status": self.status.value,
            "message": self.message,
            "reference": self.reference,
            "measured": {k: to_jsonable(v) for k, v in self.measured.items()},
        }
        if self.calibration:
            out["calibration"] = self.calibration
        if include_timing:
            out["execution_time"] = round(self.execution_time, 3)
        return out


class Assessment:
    """Collects failures and skips while a check judges its measurements."""

    def __init__(self, golden: GoldenStore):
        self.golden = golden
        self.failures: list[str] = []
        self.skipped: list[str] = []

    def require(self, ok: bool, message: str) -> None:
        if not ok:
            self.failures.append(message)

    def pin(self, key: str) -> Any:
        """Golden value for `key`; None (and a recorded reason) if unusable."""
        if not self.golden.loaded:
            self.failures.append(f"golden missing: {self.golden.path}")
            return None
        if key not in self.golden.values:
            self.failures.append(f"golden missing: {key}")
            return None
        value = self.golden.values[key]
        if value is None:
            self.skipped.append(f"{key} not calibrated")
        return value

    def at_most(self, label: str, value: float, key: str) -> None:
        limit = self.pin(key)
        if limit is not None and value > limit:
            self.failures.append(f"{label} = {value:.6g} exceeds {key} = {limit}")

    def at_least(self, label: str, value: float, key: str) -> None:
        limit = self.pin(key)
        if limit is not None and value < limit:
            self.failures.append(f"{label} = {value:.6g} below {key} = {limit}")

    def matches(self, label: str, value: float, key: str, rel_tol: float) -> None:
        expected = self.pin(key)
        if expected is None:
            return
        scale = max(abs(expected), 1e-300)
        if abs(value - expected) > rel_tol * scale:
            self.failures.append(
                f"{label} = {value!r} differs from {key} = {expected!r}"
            )

    def equals(self, label: str, value: Any, key: str) -> None:
        expected = self.pin(key)
        if expected is not None and to_jsonable(value) != expected:
            self.failures.append(f"{label} differs from {key}")

    def within(self, label: str, value: float, lo: float, hi: float) -> None:
        if not lo <= value <= hi:
            self.failures.append(f"{label} = {value:.6g} outside [{lo:g}, {hi:g}]")

    def status(self) -> CheckStatus:
        if self.failures:
            return CheckStatus.FAIL
        if self.skipped:
            return CheckStatus.SKIPPED
        return CheckStatus.PASS

    def message(self) -> str:
        return "; ".join(self.failures or self.skipped) or "ok"


class AbstractCheck(ABC):
    """One acceptance check.

    Subclasses set `name`, `reference` and `defaults` (the parameters a
    suite table may override) and implement `measure` and `assess`.
    `hard_pins` are golden values that are fixed by proof rather than
    calibration; they are written only when absent.
    """

    name: str = ""
    reference: str = ""
    defaults: Mapping[str, Any] = {}
    hard_pins: Mapping[str, Any] = {}

    @abstractmethod
    def measure(self, params: Mapping[str, Any], seed: int) -> dict[str, Any]:
        """Run the computation; returns the measured quantities."""

    @abstractmethod
    def assess(
        self, measured: dict[str, Any], params: Mapping[str, Any], a: Assessment
    ) -> None:
        """Record failures for measured quantities outside their limits."""

    def calibrate(self, measured: dict[str, Any]) -> dict[str, Any]:
        """Golden values proposed by a calibration run."""
        return {}

    def run(
        self,
        params: Mapping[str, Any],
        seed: int,
        golden: GoldenStore,
        calibrate: bool = False,
    ) -> CheckResult:
        start = time.perf_counter()
        measured: dict[str, Any] = {}
        calibration: dict[str, Any] = {}
        try:
            measured = self.measure(params, seed)
            if calibrate:
                calibration = {
                    k: v for k, v in self.hard_pins.items() if k not in golden.values
                }
                calibration.update(self.calibrate(measured))
                status, message = CheckStatus.PASS, "calibrated"
            else:
                a = Assessment(golden)
                self.assess(measured, params, a)
                status, message = a.status(), a.message()
        except Hyperl4Error as e:
            logging.error(f"Check '{self.name}' raised: {e.message}")
            status, message = CheckStatus.ERROR, e.message
        except Exception as e:
            logging.exception(f"Check '{self.name}' crashed")
            status, message = CheckStatus.ERROR, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - start
        logging.info(f"{self.name}: {status.value} ({elapsed:.2f}s) {message}")
        return CheckResult(
            name=self.name,
            status=status,
            message=message,
            reference=self.reference,
            execution_time=elapsed,
            measured=measured,
            calibration=calibration,
        )


def upper_pin(value: float) -> float:
    return float(f"{value * HEADROOM:.6g}")


def lower_pin(value: float) -> float:
    return float(f"{value / HEADROOM:.6g}")
