import logging
from pathlib import Path

import numpy as np
import pytest

from hyperl4.weighted_set import WeightedSet, WeightMode


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(autouse=True)
def restore_root_logger():
    """main() replaces the root handlers; put pytest's back afterwards."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    root.handlers = handlers
    root.setLevel(level)


@pytest.fixture
def write_csv(tmp_path):
    """Write `lines` (header first) to tmp_path/name and return the path."""

    def write(name: str, lines: list[str]) -> Path:
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return write


def random_set(rng, n: int, radius: int, exact: bool = True) -> WeightedSet:
    """n distinct points in [-radius, radius]^3 with small random weights."""
    pts = set()
    while len(pts) < n:
        pts.add(tuple(int(c) for c in rng.integers(-radius, radius + 1, size=3)))
    pts = sorted(pts)
    if exact:
        return WeightedSet(pts, [int(w) for w in rng.integers(1, 4, size=n)], WeightMode.EXACT)
    weights = rng.normal(size=n) + 1j * rng.normal(size=n)
    return WeightedSet(pts, weights, WeightMode.NUMERIC)


def line_set(N: int) -> WeightedSet:
    """chi of {(k, k, 0) : 1 <= k <= N}, a line along a cone direction."""
    return WeightedSet.characteristic([(k, k, 0) for k in range(1, N + 1)])
