import pytest
from hypothesis import settings

# dense oracles make single examples slow; the suite relies on example counts, not timing
settings.register_profile("trapbench", deadline=None)
settings.load_profile("trapbench")

_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_line():
    def record(line: str) -> None:
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
