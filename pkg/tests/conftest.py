import support


def pytest_terminal_summary(terminalreporter):
    if support.CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in support.CRITERION_LINES:
            terminalreporter.write_line(line)
