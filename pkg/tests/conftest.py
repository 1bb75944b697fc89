from functools import lru_cache

import numpy as np
import pytest

from wavesplit.engineer import engineer_splitting
from wavesplit.lattice import ChainSpec, CouplingPattern


@lru_cache(maxsize=None)
def splitting_pattern(length: int, theta: float = np.pi / 4) -> CouplingPattern:
    result = engineer_splitting(ChainSpec(length, 1.0, theta))
    assert result.converged, f"L={length} did not converge"
    return result.pattern


def random_mirror_pattern(rng, length, field_scale=0.5):
    n_half = length // 2
    return CouplingPattern.symmetric(
        rng.uniform(0.3, 1.5, n_half),
        rng.uniform(-field_scale, field_scale, length - n_half),
        length,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one PASS/FAIL line for an acceptance criterion and assert it."""

    def _record(label: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
