import numpy as np
import pytest

from rwadic.cocycle import Cocycle, GroupSpec
from rwadic.measures import Measures
from rwadic.symbolic import validate_tms

FULL2 = [[1, 1], [1, 1]]
GOLDEN = [[1, 1], [1, 0]]
FULL3 = [[1, 1, 1], [1, 1, 1], [1, 1, 1]]

# a handful of mixing shifts with different extreme-point structure
MATRICES = {
    "full2": FULL2,
    "golden": GOLDEN,
    "full3": FULL3,
    "rotation3": [[0, 1, 1], [1, 0, 1], [1, 1, 0]],
    "sparse3": [[0, 1, 0], [0, 1, 1], [1, 1, 0]],
    "tri3": [[1, 1, 0], [0, 1, 1], [1, 0, 1]],
    "even4": [[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 1, 1]],
}


def symbol_count(ts, symbol=1):
    """f(x) = 1 if x_1 == symbol else 0."""
    table = {(a,): [int(a == symbol)] for a in range(ts.d)}
    return Cocycle(ts, 1, GroupSpec(1, 1), table)


def natural_cocycle(ts):
    """Occurrence indicators of the symbols 1..d-1 in the first coordinate."""
    d = ts.d
    table = {(a,): [int(a == j) for j in range(1, d)] for a in range(d)}
    return Cocycle(ts, 1, GroupSpec(d - 1, d - 1), table)


@pytest.fixture(scope="session")
def full2():
    return validate_tms(FULL2)


@pytest.fixture(scope="session")
def golden():
    return validate_tms(GOLDEN)


@pytest.fixture(scope="session")
def full3():
    return validate_tms(FULL3)


@pytest.fixture(scope="session")
def hik(full2):
    return symbol_count(full2)


@pytest.fixture(scope="session")
def golden_f(golden):
    return symbol_count(golden)


@pytest.fixture(scope="session")
def full3_natural(full3):
    return natural_cocycle(full3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def golden_measures(golden):
    return Measures(golden)


# ------------------------------------------------------------ acceptance log

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; the lines are repeated in the terminal summary."""

    def record(label: str, ok: bool | None, detail: str) -> bool | None:
        verdict = "INFO" if ok is None else "PASS" if ok else "FAIL"
        line = f"[{verdict}] {label}: {detail}"
        request.config.stash[ACCEPTANCE].append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
