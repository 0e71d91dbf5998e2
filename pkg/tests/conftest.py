import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent / "oracles"))


@pytest.fixture(scope="session")
def grid():
    from vortexlab.radial_profiles import RadialGrid

    return RadialGrid.uniform()


@pytest.fixture(scope="session")
def w2(grid):
    from vortexlab.radial_profiles import w2_profile

    return w2_profile(grid)


_VERDICTS = {}


@pytest.fixture
def verdict():
    """Record one part of an acceptance criterion; parts are merged per criterion."""
    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        _, parts = _VERDICTS.setdefault(number, (title, []))
        parts.append((bool(ok), detail))
        print(f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        title, parts = _VERDICTS[number]
        ok = all(p[0] for p in parts)
        detail = "; ".join(p[1] for p in parts)
        terminalreporter.write_line(f"{number:2d}. {'PASS' if ok else 'FAIL'}  {title}: {detail}")
