import json
from pathlib import Path

import pytest

from gensum.builder import OrientationMap, build, cycles

GOLDEN = Path(__file__).parent / "golden"

# exterior arcs of the 4-cycle / 3-cycle example digraph, x_i = i, y_j = 4 + j
FIGURE2_ARCS = [
    (0, 4), (0, 5), (0, 6), (1, 4), (1, 5), (6, 1),
    (4, 2), (5, 2), (6, 2), (3, 4), (5, 3), (3, 6),
]
FIGURE2_BITS = 0x5E0


@pytest.fixture
def figure2():
    return build(cycles(4, 3), OrientationMap(FIGURE2_BITS, 12))


def load_golden(name: str):
    return json.loads((GOLDEN / name).read_text())


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
