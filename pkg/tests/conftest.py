import pytest

from wpcn._backend import available_backends
from wpcn.model import SystemParams

BACKENDS = available_backends()


@pytest.fixture(params=sorted(BACKENDS))
def kern(request):
    """Each importable kernel module in turn."""
    return BACKENDS[request.param]


@pytest.fixture
def canonical():
    # N=2, P=30 dBm, tau=0.5 with the default link budget: gamma_bar*omega^2 = 5
    return SystemParams()


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, when that suite ran."""
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        cases = mod.RESULTS[key]
        ok = all(passed for _, passed, _ in cases)
        failed = [f"{case}: {detail}" for case, passed, detail in cases if not passed]
        line = f"criterion {key}: {'PASS' if ok else 'FAIL'} ({len(cases)} case(s))"
        if failed:
            line += " | " + "; ".join(failed)
        tr.write_line(line)
