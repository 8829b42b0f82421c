import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> list of (part, passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[num]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {'ok' if p else 'FAILED'} ({d})" for name, p, d in parts)
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {detail}")
