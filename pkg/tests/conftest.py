import re

# criterion number -> {part name: passed}
_CRITERIA: dict = {}

_TITLES = {
    1: "oracle equivalence",
    2: "partial sum identity",
    3: "c0 diagonal envelope",
    4: "l1 cppm failure",
    5: "psum theorem",
    6: "disjoint identities",
    7: "basis lower bound",
    8: "moduli",
    9: "classifier golden",
    10: "invariant suite",
}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or report.failed:
        parts = _CRITERIA.setdefault(int(m.group(1)), {})
        parts[m.group(2)] = parts.get(m.group(2), True) and not report.failed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n, parts in sorted(_CRITERIA.items()):
        ok = all(parts.values())
        bad = [p.replace("_", " ") for p, v in parts.items() if not v]
        note = f"  (failed: {', '.join(bad)})" if bad else ""
        title = _TITLES.get(n, next(iter(parts)).replace("_", " "))
        terminalreporter.write_line(f"criterion {n:2d} {title:<28} {'PASS' if ok else 'FAIL'}{note}")
