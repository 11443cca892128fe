from __future__ import annotations

import re
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from impulsive.config import load_config  # noqa: E402
from impulsive.rmap import StroboscopicAnalyzer  # noqa: E402
from impulsive.vectorfield import find_equilibria  # noqa: E402

from acceptance_log import RESULTS as ACCEPTANCE  # noqa: E402


@pytest.fixture(scope="session")
def cubic_cfg():
    return load_config("cubic")


@pytest.fixture(scope="session")
def quintic_cfg():
    return load_config("quintic")


@pytest.fixture(scope="session")
def cubic_vf(cubic_cfg):
    return cubic_cfg.vector_field()


@pytest.fixture(scope="session")
def quintic_vf(quintic_cfg):
    return quintic_cfg.vector_field()


@pytest.fixture(scope="session")
def cubic_an(cubic_vf):
    return StroboscopicAnalyzer(cubic_vf, 1.0)


@pytest.fixture(scope="session")
def quintic_an(quintic_cfg):
    return StroboscopicAnalyzer(quintic_cfg.vector_field(), quintic_cfg.omega)


@pytest.fixture(scope="session")
def cubic_eq(cubic_vf):
    return find_equilibria(cubic_vf)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(re.match(r'\d+', k).group()), k)):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
