import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion."""
    name = request.node.name
    state = {"detail": ""}

    def note(detail):
        state["detail"] = detail

    yield note
    failed = getattr(request.node, "rep_call", None)
    ok = failed is not None and failed.passed
    _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {name}  {state['detail']}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
