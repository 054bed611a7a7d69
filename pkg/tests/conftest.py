import sys


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "CRITERIA", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, status = results[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
