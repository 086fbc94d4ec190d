import pytest

_LINES_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = {}


@pytest.fixture
def acceptance_lines(request):
    return request.config.stash[_LINES_KEY]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(lines):
        terminalreporter.write_line(lines[k])
