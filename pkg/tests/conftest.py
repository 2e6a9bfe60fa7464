import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quantdim import geometry, model

settings.register_profile("quantdim", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("quantdim")

RANDOM_SEEDS = list(range(10))


def random_systems():
    return [model.random_system(np.random.default_rng(s)) for s in RANDOM_SEEDS]


@pytest.fixture(scope="session")
def cantor():
    return model.cantor2()


@pytest.fixture(scope="session")
def ring():
    return model.ring3()


@pytest.fixture(scope="session")
def skew():
    return model.skew2()


@pytest.fixture(scope="session")
def cantor_layout(cantor):
    return geometry.equal_gap(cantor)


@pytest.fixture(scope="session")
def ring_layout(ring):
    return geometry.equal_gap(ring)


@pytest.fixture(scope="session")
def skew_layout(skew):
    return geometry.equal_gap(skew, allow_touching=True)


@pytest.fixture(scope="session")
def systems():
    return random_systems()


ACCEPTANCE_LINES = []


class _Acceptance:
    """Records one pass/fail line per acceptance criterion."""

    def check(self, number, title, checks, detail=""):
        failed = [name for name, ok in checks.items() if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {number:>2} {status}: {title}"
        if detail:
            line += f" [{detail}]"
        if failed:
            line += " -- failed: " + ", ".join(failed)
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert not failed, line


@pytest.fixture(scope="session")
def acceptance():
    return _Acceptance()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
