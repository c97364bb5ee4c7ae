def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    lines = test_acceptance.format_results()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
