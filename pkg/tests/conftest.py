"""Suite-wide hooks: prints one status line per acceptance check at the end."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    statuses: dict[str, str] = {}
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::" not in nodeid:
                continue
            if outcome == "passed" and report.when != "call":
                continue
            name = nodeid.split("::")[-1]
            if statuses.get(name) != "FAIL":
                statuses[name] = label
    if statuses:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name in sorted(statuses):
            terminalreporter.write_line(f"  {statuses[name]}  {name}")
