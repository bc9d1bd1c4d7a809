"""Shared fixtures: cached pipeline runs and the acceptance-line reporter."""

from __future__ import annotations

import pytest

from halfline import pipeline, potential
from halfline.config import RunConfig

ACCEPTANCE = pytest.StashKey[dict]()

DEFAULT_H = 0.01
HALF_H = 0.005


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        ok, detail = lines[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)`` records the verdict line and returns ``ok``."""

    def record(n: int, ok: bool, detail: str) -> bool:
        ok = bool(ok)
        request.config.stash[ACCEPTANCE][n] = (ok, detail)
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


@pytest.fixture(scope="session")
def cfg() -> RunConfig:
    return RunConfig()


@pytest.fixture(scope="session")
def cfg_half() -> RunConfig:
    return RunConfig(h=HALF_H)


@pytest.fixture(scope="session")
def coarse_cfg() -> RunConfig:
    """Small grids for fast unit tests."""
    return RunConfig(x_max=10.0, h=0.05, k_max=30.0, dk=0.02, x_neg=-10.0)


@pytest.fixture(scope="session")
def bump_roundtrip(cfg):
    return pipeline.run_roundtrip(potential.polynomial_bump(h=DEFAULT_H), cfg)


@pytest.fixture(scope="session")
def bump_roundtrip_half(cfg_half):
    return pipeline.run_roundtrip(potential.polynomial_bump(h=HALF_H), cfg_half)


@pytest.fixture(scope="session")
def sech_roundtrip(cfg):
    return pipeline.run_roundtrip(potential.sech2_well(1.0, h=DEFAULT_H), cfg)


@pytest.fixture(scope="session")
def sech_forward_half(cfg_half):
    return pipeline.run_forward(potential.sech2_well(1.0, h=HALF_H), cfg_half)


@pytest.fixture(scope="session")
def sech_inversion_half(sech_forward_half, cfg_half):
    return pipeline.run_inversion(sech_forward_half.data, cfg_half)


@pytest.fixture(scope="session")
def zero_forward(cfg):
    return pipeline.run_forward(potential.zero(h=DEFAULT_H), cfg)


@pytest.fixture(scope="session")
def well6_forward(cfg):
    """``-6 sech^2``: one bound state at k = 1 with s = 12 and f(0) = -1/2."""
    return pipeline.run_forward(potential.sech2_well(1.0, depth=6.0), cfg)


@pytest.fixture(scope="session")
def well20_forward(cfg):
    """``-20 sech^2``: two bound states at k = 3 and k = 1."""
    return pipeline.run_forward(potential.sech2_well(1.0, depth=20.0), cfg)

