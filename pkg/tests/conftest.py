"""Collects one verdict per acceptance criterion and prints them at the end of the run."""

_acceptance: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    k = props["criterion"]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = "PASS" if report.outcome == "passed" else "FAIL"
        _acceptance[k] = (verdict, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_acceptance):
        verdict, detail = _acceptance[k]
        terminalreporter.write_line(f"criterion {k:2d}: {verdict}  {detail}")
