"""Prints the acceptance verdicts collected through ``record_property``."""


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) != "call":
                continue
            for name, value in getattr(rep, "user_properties", ()):
                if name == "acceptance":
                    lines.append(f"{value[0]:>3}  {'PASS' if rep.passed else 'FAIL'}  {value[1]}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[0])):
            terminalreporter.write_line(line)
