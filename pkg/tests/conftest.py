import sys
from pathlib import Path

import pytest

from pmsignal.synth import FIXTURE_DIR
from pmsignal.trades import Side, Trade

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_RESULTS: list[tuple[str, bool, float, float]] = []


def make_trade(ts, price, size=1.0, side=Side.BUY, trader="a", market="m", platform="poly"):
    return Trade(int(ts), market, platform, side, float(price), float(size), trader)


@pytest.fixture
def fixture_dir() -> Path:
    return FIXTURE_DIR


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, elapsed, budget in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] {name}  ({elapsed:.2f}s / budget {budget:g}s)")
