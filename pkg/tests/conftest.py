from pathlib import Path

import pytest

from oscide.devices import DeviceParams, TankParams

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def design_dev():
    return DeviceParams(gm=9e-3, ro=50e3, cgs=40e-15, beta=0.045, vt=0.4)


@pytest.fixture
def design_tank():
    return TankParams(l=400e-12, rp=900.0, cp=10e-15, cl=15e-15)


DESIGN_CVAR = 6.33e-15


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
