import pytest

_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record the verdict of one acceptance criterion.

    Call ``acceptance(number, title, ok, detail)``; a test that dies before
    reporting is recorded as a failure.
    """
    reported = []

    def report(number, title, ok, detail=""):
        _ACCEPTANCE[number] = (title, bool(ok), detail)
        reported.append(number)
        return ok

    yield report
    if not reported:
        name = request.node.name
        _ACCEPTANCE.setdefault(name, (name, False, "no verdict (test raised)"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (isinstance(k, str), k)):
        title, ok, detail = _ACCEPTANCE[key]
        label = f"criterion {key:2d}" if isinstance(key, int) else key
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {title}  [{detail}]")
