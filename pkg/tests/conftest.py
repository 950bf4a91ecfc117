"""Per-criterion pass/fail summary for the acceptance tests.

Tests marked ``@pytest.mark.criterion(n)`` decide criterion ``n``; a criterion
passes only if every such test passed (an expected failure counts as FAIL).
Tests marked ``criterion(n, companion=True)`` are reported alongside but do not
decide the verdict.
"""
from collections import defaultdict

_outcomes = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, companion=False): acceptance criterion decided by this test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", (mark.args[0], mark.kwargs.get("companion", False))))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.outcome != "passed":
        number, companion = props["criterion"]
        if hasattr(report, "wasxfail"):
            verdict = "FAIL (expected)"
        else:
            verdict = report.outcome.upper().replace("PASSED", "PASS").replace("FAILED", "FAIL")
        _outcomes[number].append((report.nodeid.split("::")[-1], companion, verdict))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_outcomes):
        deciding = [o for o in _outcomes[number] if not o[1]]
        ok = deciding and all(v == "PASS" for _, _, v in deciding)
        tr.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}")
        for name, companion, verdict in _outcomes[number]:
            tag = "companion " if companion else ""
            tr.write_line(f"    {tag}{name}: {verdict}")
