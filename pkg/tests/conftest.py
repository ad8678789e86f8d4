from collections import OrderedDict

import pytest

# criterion label -> list of (part, passed, detail)
_ACCEPTANCE: "OrderedDict[str, list[tuple[str, bool, str]]]" = OrderedDict()


class AcceptanceRecorder:
    def __init__(self, label: str):
        self.label = label
        self.parts = _ACCEPTANCE.setdefault(label, [])

    def check(self, part: str, passed: bool, detail: str = "") -> bool:
        self.parts.append((part, bool(passed), detail))
        return bool(passed)


@pytest.fixture
def acceptance():
    return AcceptanceRecorder


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, parts in _ACCEPTANCE.items():
        ok = all(p for _, p, _ in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
        for part, passed, detail in parts:
            terminalreporter.write_line(f"        [{'ok' if passed else 'FAILED'}] {part}: {detail}")
