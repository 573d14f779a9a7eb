import numpy as np
import pytest

from trigger_descent.oracle import Problem
from trigger_descent.problems import simulate_fieller_data, simulate_wedderburn_data

# Toy trace with window w = 3, outer iterations k = 0..24.  Objective at each
# outer iterate and the threshold row, read off the worked example.
TOY_W = 3
TOY_F = [4, 4, 2.5, 3, 3, 3, 2.75, 2.25, 2.25, 1.0, 1, 1, 1, 2.5, 2.0, 1.5, 1.5, 1.5, 0.5, 0.25, 0.25, 0.15, 0.10, 0.10, 0.05]
TOY_TAU = [4, 4, 4, 4, 4, 4, 3, 3, 3, 2.75, 2.75, 2.75, 2.75, 2.5, 2.5, 2.5, 2.0, 2.0, 1.5, 1.5, 1.5, 0.5, 0.25, 0.25, 0.15]
TOY_ELL = [0, 2, 3, 6, 7, 9, 13, 14, 15, 16, 18, 19, 21, 22, 24]
TOY_ACCEPTED_K = [1, 2, 5, 6, 8, 12, 13, 14, 15, 17, 18, 20, 21, 23]
TOY_L = [0, 0, 1, 2, 2, 2, 3, 4, 4, 5, 5, 5, 5, 6, 7, 8, 9, 9, 10, 11, 11, 12, 13, 13, 14]
TOY_O = [0, 0, 0, 0, 0, 0, 2, 2, 2, 3, 3, 3, 3, 6, 6, 6, 7, 7, 9, 9, 9, 10, 11, 11, 12]
TOY_O_SEQ = [0, 2, 3, 6, 7, 9, 10, 11, 12]
TOY_G_SEQ = [0, 3, 6, 9, 12]


def toy_pattern():
    """Per-record accepted value (None for a rejection) for the toy trace."""
    accepted = set(TOY_ACCEPTED_K)
    return [TOY_F[k + 1] if k in accepted else None for k in range(len(TOY_F) - 1)]


@pytest.fixture
def toy_trace():
    from trigger_descent.trace import trace_from_pattern

    return trace_from_pattern(TOY_F[0], toy_pattern(), TOY_W)


def quadratic(n=2, scale=1.0, x0=None, name="quadratic") -> Problem:
    return Problem(
        name=name,
        dimension=n,
        objective=lambda x: 0.5 * scale * float(x @ x),
        gradient=lambda x: scale * np.asarray(x, dtype=float),
        x0=np.ones(n) if x0 is None else np.asarray(x0, dtype=float),
        known_minimizer=np.zeros(n),
        lower_bound=0.0,
    )


@pytest.fixture(scope="session")
def fieller_data():
    return simulate_fieller_data()


@pytest.fixture(scope="session")
def wedderburn_data():
    return simulate_wedderburn_data()


def strip_wall_time(csv_text):
    """Blank the wall_time_s column so CSV outputs can be compared byte for byte."""
    out = []
    col = None
    for line in csv_text.splitlines():
        if line.startswith("#"):
            out.append(line)
            continue
        cells = line.split(",")
        if col is None:
            col = cells.index("wall_time_s")
        else:
            cells[col] = ""
        out.append(",".join(cells))
    return "\n".join(out)


# one pass/fail line per acceptance criterion, printed after the run
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    _CRITERIA[number] = (title, report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, passed, detail = _CRITERIA[number]
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))
