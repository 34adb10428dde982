import re

TITLES = {
    1: "bar closed-form flow",
    2: "momentum conservation",
    3: "Routh-force certificate",
    4: "symplectic preservation",
    5: "midpoint/Routhian identity",
    6: "reduction correspondence",
    7: "central-potential run",
    8: "convergence orders",
    9: "regularity iff nondegeneracy",
}

_outcomes = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        prev = _outcomes.get(k)
        if prev is None or prev[0] == "PASS":
            msg = ""
            if report.failed and report.longrepr is not None:
                crash = getattr(report.longrepr, "reprcrash", None)
                msg = crash.message.splitlines()[0] if crash else ""
            _outcomes[k] = ("PASS" if report.passed else "FAIL", report.duration, msg)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(_outcomes):
        verdict, dur, msg = _outcomes[k]
        line = f"criterion {k}: {verdict}  {TITLES.get(k, '')} ({dur:.2f} s)"
        if msg:
            line += f"  {msg}"
        terminalreporter.write_line(line)
