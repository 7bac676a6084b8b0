import pytest

from prill.pipeline import TowerOptions, build_tower

REFERENCE = ("0", "1", "2", "3", "4", "6")

# lines reported by the acceptance module, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def reference_tower():
    """The (0,1,2,3,4,6) tower, without the consistency reruns."""
    return build_tower(list(REFERENCE), TowerOptions(consistency=False, threads=1))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
