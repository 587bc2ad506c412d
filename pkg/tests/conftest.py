from __future__ import annotations

import hypothesis.strategies as st
import pytest
from hypothesis import HealthCheck, settings

from specfeedback.logic import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    Implies,
    Next,
    Not,
    Or,
    Until,
)

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

PROPS = ("a", "b", "c")


def formulas(props=PROPS, max_leaves: int = 12, constants: bool = True):
    leaves = [st.sampled_from([Atom(p) for p in props])]
    if constants:
        leaves.append(st.sampled_from([TRUE, FALSE]))
    base = st.one_of(*leaves)

    def extend(children):
        return st.one_of(
            st.builds(Not, children),
            st.builds(Next, children),
            st.builds(Eventually, children),
            st.builds(Always, children),
            st.builds(And, children, children),
            st.builds(Or, children, children),
            st.builds(Implies, children, children),
            st.builds(Until, children, children),
        )

    return st.recursive(base, extend, max_leaves=max_leaves)


def letters(props=PROPS):
    return st.frozensets(st.sampled_from(props))


# -- acceptance summary -------------------------------------------------------------------

_AC_RESULTS: dict[str, tuple[str, str]] = {}
_SEVERITY = {"PASS": 0, "SKIP": 1, "FAIL": 2}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(ident, title): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    ident, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        # a criterion spread over several tests passes only if all of them do
        prev = _AC_RESULTS.get(ident, ("PASS", title))[0]
        if _SEVERITY[prev] > _SEVERITY[status]:
            status = prev
        _AC_RESULTS[ident] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for ident in sorted(_AC_RESULTS, key=lambda s: int(s[2:])):
        status, title = _AC_RESULTS[ident]
        terminalreporter.write_line(f"{ident} {status}: {title}")
