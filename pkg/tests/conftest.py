"""Shared pytest plumbing.

The acceptance tests register one human-readable line each; those lines are
echoed in the terminal summary so a plain `pytest -v` run always shows one
PASS/FAIL line per acceptance criterion, whatever the capture settings.
"""

_ACCEPTANCE_LINES = {}


def record_acceptance(number: int, label: str, passed: bool) -> None:
    status = "PASS" if passed else "FAIL"
    _ACCEPTANCE_LINES[number] = f"ACCEPTANCE {number:2d} {label}: {status}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])
