import pytest

from k2df.matrix import CoordMatrix, random_matrix
from k2df.sample import example_matrix

_criteria: dict[str, tuple[str, float]] = {}


@pytest.fixture(scope="session")
def fig_matrix():
    return example_matrix()


@pytest.fixture(scope="session")
def small_matrices():
    """Assorted matrices with n <= 64, including degenerate shapes."""
    out = [CoordMatrix(1), CoordMatrix(1, [0], [0]), CoordMatrix(2, [0], [0]), CoordMatrix(3, [2], [1]),
           CoordMatrix(16), example_matrix()]
    seed = 0
    for n in (2, 5, 8, 13, 16, 31, 33, 64):
        for d in (0.02, 0.1, 0.5, 1.0):
            seed += 1
            out.append(random_matrix(n, d, seed))
    return out


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call" or (
        "test_acceptance.py" in report.nodeid and report.when == "setup" and report.failed
    ):
        name = report.nodeid.split("::")[-1]
        if name.startswith("test_criterion_"):
            _criteria[name] = ("PASS" if report.passed else "FAIL", report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda s: int(s.split("_")[2])):
        status, dur = _criteria[name]
        num = name.split("_")[2]
        terminalreporter.write_line(f"criterion {num}: {status}  {name}  ({dur:.1f}s)")
