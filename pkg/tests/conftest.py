import json

import pytest

_ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: criterion(number, passed, detail)."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _ACCEPTANCE[number] = (bool(passed), detail)
        print(f"[criterion {number:2d}] {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


@pytest.fixture
def spec_file(tmp_path):
    """Write a distribution spec dict to a JSON file and return its path."""

    def write(name: str, spec: dict):
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(spec))
        return path

    return write


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
