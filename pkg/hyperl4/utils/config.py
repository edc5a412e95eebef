"""
Suite configuration and golden values.

A suite file is TOML with an ``[app]`` table and one ``[checks.<name>]``
table per acceptance check::

    [app]
    log_level = "INFO"
    output = "./output"
    file_logging = true
    seed = 20240601
    jobs = 1
    golden = "configs/golden.json"

    [checks.oracle_equivalence]
    trials = 100

Check tables are optional; parameters not given fall back to the check's
defaults, unknown parameters are rejected.
"""

import json
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

from hyperl4.errors import ConfigError
from hyperl4.utils.logger import normalize_level

APP_KEYS = ("log_level", "output", "file_logging", "seed", "jobs", "golden")

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, name: str) -> int:
    """Per-check seed: fold the UTF-8 bytes of `name` into `seed` via splitmix64."""
    state = splitmix64(seed & MASK64)
    for byte in name.encode("utf-8"):
        state = splitmix64(state ^ byte)
    return state


@dataclass(frozen=True)
class AppConfig:
    log_level: str
    output: Path
    file_logging: bool
    seed: int
    jobs: int
    golden: Path

    def to_dict(self) -> dict:
        return {
            "log_level": self.log_level,
            "output": str(self.output),
            "file_logging": self.file_logging,
            "seed": self.seed,
            "jobs": self.jobs,
            "golden": str(self.golden),
        }


@dataclass(frozen=True)
class CheckConfig:
    name: str
    enabled: bool
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "enabled": self.enabled, "params": dict(self.params)}


@dataclass(frozen=True)
class SuiteConfig:
    path: Path
    app: AppConfig
    checks: tuple[CheckConfig, ...]

    def enabled(self) -> list[CheckConfig]:
        return [c for c in self.checks if c.enabled]

    def to_dict(self) -> dict:
        return {
            "path": str(self.path),
            "app": self.app.to_dict(),
            "checks": [c.to_dict() for c in self.checks],
        }


def _app_config(raw: Mapping[str, Any], base: Path) -> AppConfig:
    missing = [k for k in APP_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"[app] is missing keys: {', '.join(missing)}")
    unknown = sorted(set(raw) - set(APP_KEYS))
    if unknown:
        raise ConfigError(f"[app] has unknown keys: {', '.join(unknown)}")
    try:
        level = normalize_level(raw["log_level"])
    except ValueError as e:
        raise ConfigError(str(e))
    if not isinstance(raw["seed"], int) or not isinstance(raw["jobs"], int):
        raise ConfigError("[app] seed and jobs must be integers")
    if raw["jobs"] < 1:
        raise ConfigError("[app] jobs must be >= 1")
    golden = Path(raw["golden"])
    if not golden.is_absolute():
        golden = base / golden
    return AppConfig(
        log_level=level,
        output=Path(raw["output"]),
        file_logging=bool(raw["file_logging"]),
        seed=raw["seed"],
        jobs=raw["jobs"],
        golden=golden,
    )


def load_suite_config(
    path: Path, defaults: Mapping[str, Mapping[str, Any]]
) -> SuiteConfig:
    """Load and validate a suite file against the registered check defaults.

    Relative golden paths resolve against the directory holding the
    ``configs/`` folder (the repository root for the shipped configs).
    """
    path = Path(path)
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Suite config not found: {path}")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}")
    if "app" not in raw:
        raise ConfigError(f"{path}: missing [app] table")
    unknown_tables = sorted(set(raw) - {"app", "checks"})
    if unknown_tables:
        raise ConfigError(f"{path}: unknown tables {', '.join(unknown_tables)}")
    base = path.resolve().parent
    if base.name == "configs":
        base = base.parent
    app = _app_config(raw["app"], base)

    tables = raw.get("checks", {})
    unknown_checks = sorted(set(tables) - set(defaults))
    if unknown_checks:
        raise ConfigError(f"Unknown checks: {', '.join(unknown_checks)}")
    checks = []
    for name in sorted(defaults):
        table = dict(tables.get(name, {}))
        enabled = bool(table.pop("enabled", True))
        extra = sorted(set(table) - set(defaults[name]))
        if extra:
            raise ConfigError(f"[checks.{name}] unknown parameters: {', '.join(extra)}")
        params = {**defaults[name], **table}
        checks.append(CheckConfig(name, enabled, MappingProxyType(params)))
    return SuiteConfig(path, app, tuple(checks))


@dataclass
class GoldenStore:
    """Golden values; `loaded` is False when the file does not exist."""

    path: Path
    loaded: bool
    values: dict[str, Any]

    @classmethod
    def load(cls, path: Path) -> "GoldenStore":
        path = Path(path)
        if not path.is_file():
            return cls(path, False, {})
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid golden file: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: golden file must hold a JSON object")
        return cls(path, True, data)

    def write(self, updates: Mapping[str, Any]) -> None:
        merged = {**self.values, **updates}
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as f:
            json.dump(dict(sorted(merged.items())), f, indent=2, ensure_ascii=False)
            f.write("\n")
        self.values = merged
        self.loaded = True
