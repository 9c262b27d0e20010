import pytest

# criterion number -> (passed, description, detail); filled by test_acceptance.py
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, name, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {name}: {detail}")


@pytest.fixture
def record():
    def _record(num, name, ok, detail):
        ACCEPTANCE[num] = (bool(ok), name, detail)
        print(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {name}: {detail}")
        return bool(ok)
    return _record
