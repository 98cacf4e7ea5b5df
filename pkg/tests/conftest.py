from __future__ import annotations

# (number, title, passed, detail) tuples filled in by test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple] = []
# free-form diagnostic lines printed after the PASS/FAIL block
ACCEPTANCE_INFO: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        tr.write_line(f"{'PASS' if ok else 'FAIL'} {num:2d} {title}: {detail}")
    for line in ACCEPTANCE_INFO:
        tr.write_line(f"info: {line}")
